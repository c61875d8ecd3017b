//! Symmetric-group combinatorics: partitions, hook-length dimensions,
//! Murnaghan-Nakayama characters and conjugacy classes.
//!
//! Everything here is exact integer arithmetic.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::perm::Perm;

/// A weakly decreasing sequence of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(argument(format!("partition {parts:?} has a zero part")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(argument(format!("partition {parts:?} is not weakly decreasing")));
        }
        Ok(Partition(parts))
    }

    /// Sorts and drops zeros.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Self {
        parts.retain(|&x| x > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Conjugate (transposed) partition.
    pub fn conjugate(&self) -> Partition {
        let first = self.0.first().copied().unwrap_or(0);
        Partition((0..first).map(|j| self.0.iter().filter(|&&x| x > j).count()).collect())
    }

    /// Number of standard Young tableaux, by the hook-length formula.
    pub fn dimension(&self) -> u64 {
        let conj = self.conjugate();
        let mut hooks: u128 = 1;
        for (i, &row) in self.0.iter().enumerate() {
            for j in 0..row {
                let arm = row - j - 1;
                let leg = conj.0[j] - i - 1;
                hooks *= (arm + leg + 1) as u128;
            }
        }
        (factorial(self.weight()) / hooks) as u64
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A conjugacy class of `S_p`, labelled by its cycle lengths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleType(pub Partition);

impl CycleType {
    pub fn of(perm: &Perm) -> Self {
        CycleType(Partition(perm.cycle_type()))
    }

    pub fn identity(p: usize) -> Self {
        CycleType(Partition(vec![1; p]))
    }

    pub fn weight(&self) -> usize {
        self.0.weight()
    }

    /// Centralizer order `z = prod_i i^{m_i} m_i!`.
    pub fn centralizer_order(&self) -> u128 {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for &x in self.0.parts() {
            *counts.entry(x).or_default() += 1;
        }
        counts
            .into_iter()
            .map(|(len, mult)| (len as u128).pow(mult as u32) * factorial(mult))
            .product()
    }

    pub fn class_size(&self) -> u128 {
        factorial(self.weight()) / self.centralizer_order()
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All partitions of `p` in lexicographically decreasing order.
pub fn enumerate_partitions(p: usize) -> Vec<Partition> {
    fn rec(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(p, p, &mut Vec::new(), &mut out);
    out
}

pub fn dimension(lambda: &Partition) -> u64 {
    lambda.dimension()
}

/// All cycle types of `S_p` with their class sizes; sizes sum to `p!`.
pub fn conjugacy_classes(p: usize) -> Vec<(CycleType, u128)> {
    enumerate_partitions(p)
        .into_iter()
        .map(|mu| {
            let ct = CycleType(mu);
            let size = ct.class_size();
            (ct, size)
        })
        .collect()
}

/// Irreducible character `chi^lambda` on the class `class`.
pub fn character(lambda: &Partition, class: &CycleType) -> Result<i64> {
    if lambda.weight() != class.weight() {
        return Err(Error::WeightMismatch { expected: lambda.weight(), got: class.weight() });
    }
    let mut memo = HashMap::new();
    Ok(mn_rec(lambda.parts(), class.0.parts(), &mut memo))
}

// Murnaghan-Nakayama on beta-sets: removing a rim hook of length r moves one
// bead from b to b - r; the sign counts the beads jumped over.
fn mn_rec(lambda: &[usize], mu: &[usize], memo: &mut HashMap<(Vec<usize>, usize), i64>) -> i64 {
    if mu.is_empty() {
        return if lambda.is_empty() { 1 } else { 0 };
    }
    let key = (lambda.to_vec(), mu.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let r = mu[0];
    let len = lambda.len();
    let beta: Vec<usize> = lambda.iter().enumerate().map(|(i, &x)| x + len - 1 - i).collect();
    let mut total = 0i64;
    for (idx, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let target = b - r;
        let jumped = beta.iter().filter(|&&x| x > target && x < b).count();
        let sign = if jumped % 2 == 0 { 1 } else { -1 };
        let mut next = beta.clone();
        next[idx] = target;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let shape: Vec<usize> = next
            .iter()
            .enumerate()
            .map(|(i, &x)| x - (len - 1 - i))
            .filter(|&x| x > 0)
            .collect();
        total += sign * mn_rec(&shape, &mu[1..], memo);
    }
    memo.insert(key, total);
    total
}

/// Full character table of `S_p`: rows by partition, columns by cycle type,
/// both in lexicographically decreasing order.
#[derive(Clone, Debug, Serialize)]
pub struct CharacterTable {
    pub p: usize,
    pub rows: Vec<Partition>,
    pub classes: Vec<(CycleType, u128)>,
    pub values: Vec<Vec<i64>>,
}

impl CharacterTable {
    pub fn new(p: usize) -> Self {
        let rows = enumerate_partitions(p);
        let classes = conjugacy_classes(p);
        let values = rows
            .iter()
            .map(|lambda| {
                classes
                    .iter()
                    .map(|(ct, _)| character(lambda, ct).expect("weights agree"))
                    .collect()
            })
            .collect();
        CharacterTable { p, rows, classes, values }
    }

    pub fn value(&self, lambda: &Partition, class: &CycleType) -> Option<i64> {
        let i = self.rows.iter().position(|r| r == lambda)?;
        let j = self.classes.iter().position(|(c, _)| c == class)?;
        Some(self.values[i][j])
    }

    /// `sum_lambda chi(c) chi(c') |c|`, which equals `p! delta_{c,c'}`.
    pub fn column_inner(&self, c1: usize, c2: usize) -> i128 {
        let size = self.classes[c1].1 as i128;
        self.values.iter().map(|row| row[c1] as i128 * row[c2] as i128 * size).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["lambda".to_string()];
        header.extend(self.classes.iter().map(|(c, _)| c.to_string()));
        w.write_record(&header)?;
        for (lambda, row) in self.rows.iter().zip(&self.values) {
            let mut rec = vec![lambda.to_string()];
            rec.extend(row.iter().map(i64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    // brute-force count of standard tableaux by removing corners
    fn syt_count(shape: &[usize]) -> u64 {
        if shape.iter().sum::<usize>() == 0 {
            return 1;
        }
        let mut total = 0;
        for i in 0..shape.len() {
            let is_corner = shape[i] > 0 && (i + 1 == shape.len() || shape[i + 1] < shape[i]);
            if is_corner {
                let mut s = shape.to_vec();
                s[i] -= 1;
                total += syt_count(&s);
            }
        }
        total
    }

    #[test]
    fn partitions_small() {
        assert_eq!(enumerate_partitions(0), vec![Partition::empty()]);
        assert_eq!(enumerate_partitions(1), vec![part(&[1])]);
        assert_eq!(enumerate_partitions(3), vec![part(&[3]), part(&[2, 1]), part(&[1, 1, 1])]);
        let counts: Vec<usize> = (0..8).map(|p| enumerate_partitions(p).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15]);
    }

    #[test]
    fn hook_length_matches_brute_force() {
        for p in 0..=5 {
            for lambda in enumerate_partitions(p) {
                assert_eq!(lambda.dimension(), syt_count(lambda.parts()), "{lambda}");
            }
        }
        assert_eq!(part(&[2, 1]).dimension(), 2);
        assert_eq!(part(&[4]).dimension(), 1);
        assert_eq!(part(&[1, 1, 1, 1]).dimension(), 1);
    }

    #[test]
    fn characters_known_values() {
        let ct = |v: &[usize]| CycleType(part(v));
        assert_eq!(character(&part(&[1, 1]), &ct(&[2])).unwrap(), -1);
        assert_eq!(character(&part(&[3]), &ct(&[2, 1])).unwrap(), 1);
        // chi^{(2,1)}(g) = fix(g) - 1 from the permutation representation on C^3
        for g in Perm::all(3) {
            let fix = (0..3).filter(|&i| g.apply(i) == i).count() as i64;
            assert_eq!(character(&part(&[2, 1]), &CycleType::of(&g)).unwrap(), fix - 1);
        }
        assert!(character(&part(&[2]), &ct(&[1, 1, 1])).is_err());
    }

    #[test]
    fn sign_character_matches_permutation_sign() {
        for p in 1..=5 {
            let sign = Partition(vec![1; p]);
            for g in Perm::all(p) {
                assert_eq!(character(&sign, &CycleType::of(&g)).unwrap(), g.sign());
            }
        }
    }

    #[test]
    fn class_sizes_match_enumeration() {
        for p in 1..=5 {
            let classes = conjugacy_classes(p);
            let mut counts: HashMap<CycleType, u128> = HashMap::new();
            for g in Perm::all(p) {
                *counts.entry(CycleType::of(&g)).or_default() += 1;
            }
            for (c, size) in &classes {
                assert_eq!(counts[c], *size, "{c}");
            }
            assert_eq!(classes.iter().map(|(_, s)| s).sum::<u128>(), factorial(p));
        }
        let s2 = conjugacy_classes(2);
        assert_eq!(s2, vec![(CycleType(part(&[2])), 1), (CycleType(part(&[1, 1])), 1)]);
    }

    #[test]
    fn table_orthogonality_and_dimensions() {
        for p in 1..=6 {
            let t = CharacterTable::new(p);
            let sum_sq: u128 = t.rows.iter().map(|l| (l.dimension() as u128).pow(2)).sum();
            assert_eq!(sum_sq, factorial(p));
            for i in 0..t.classes.len() {
                for j in 0..t.classes.len() {
                    let expect = if i == j { factorial(p) as i128 } else { 0 };
                    assert_eq!(t.column_inner(i, j), expect);
                }
            }
            for lambda in &t.rows {
                assert_eq!(t.value(lambda, &CycleType::identity(p)).unwrap(), lambda.dimension() as i64);
            }
        }
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        CharacterTable::new(2).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "lambda,(2),\"(1,1)\"\n(2),1,1\n\"(1,1)\",-1,1\n");
    }
}
