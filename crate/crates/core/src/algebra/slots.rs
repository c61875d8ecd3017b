use crate::legops::ModelSpace;
use crate::linalg::{max_abs, Mat};

/// Tensor slots of the model space: slot `2k` is the row index of leg `k`,
/// slot `2k+1` its column index. All slots have dimension N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotLayout {
    n: usize,
    slots: usize,
}

impl SlotLayout {
    pub fn new(space: &ModelSpace) -> Self {
        Self { n: space.n(), slots: 2 * space.legs() }
    }

    fn stride(&self, slot: usize) -> usize {
        self.n.pow((self.slots - 1 - slot) as u32)
    }

    fn digit(&self, idx: usize, slot: usize) -> usize {
        (idx / self.stride(slot)) % self.n
    }

    /// Whether `x = y (x) I` on `slot`, up to `tol` relative to its largest entry.
    pub fn is_inert(&self, x: &Mat, slot: usize, tol: f64) -> bool {
        let scale = max_abs(x).max(1e-300);
        let stride = self.stride(slot);
        let d = x.nrows();
        for i in 0..d {
            let di = self.digit(i, slot);
            for j in 0..d {
                let dj = self.digit(j, slot);
                let z = x[(i, j)];
                let expect = if di != dj {
                    crate::linalg::ZERO
                } else {
                    x[(i - di * stride, j - dj * stride)]
                };
                if (z - expect).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Flat indices with every slot outside `active` fixed to 0, in order.
    pub fn active_indices(&self, active: &[usize]) -> Vec<usize> {
        let dim = self.n.pow(active.len() as u32);
        (0..dim)
            .map(|r| {
                let mut rest = r;
                let mut idx = 0;
                for &slot in active.iter().rev() {
                    idx += (rest % self.n) * self.stride(slot);
                    rest /= self.n;
                }
                idx
            })
            .collect()
    }

    /// Restriction of `x` to the active slots.
    pub fn reduce(&self, x: &Mat, active: &[usize]) -> Mat {
        let idx = self.active_indices(active);
        Mat::from_fn(idx.len(), idx.len(), |i, j| x[(idx[i], idx[j])])
    }

    /// `y (x) I` with `y` on the active slots and the identity elsewhere.
    pub fn embed(&self, y: &Mat, active: &[usize]) -> Mat {
        let total = self.n.pow(self.slots as u32);
        let inert: Vec<usize> = (0..self.slots).filter(|s| !active.contains(s)).collect();
        let mut out = Mat::zeros(total, total);
        let act = self.active_indices(active);
        let off = self.active_indices(&inert);
        for &o in &off {
            for (i, &ai) in act.iter().enumerate() {
                for (j, &aj) in act.iter().enumerate() {
                    out[(ai + o, aj + o)] = y[(i, j)];
                }
            }
        }
        out
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Slots on which some matrix acts non-trivially.
    pub fn active_slots(&self, mats: &[&Mat], tol: f64) -> Vec<usize> {
        (0..self.slots)
            .filter(|&s| mats.iter().any(|x| !self.is_inert(x, s, tol)))
            .collect()
    }
}
