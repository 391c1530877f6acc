//! Multiplicity vectors indexing the state probabilities.
//!
//! `Ω(k, n)` is the set of `(x_1, .., x_k)` with `Σ j·x_j = n`: the ways to
//! reach count `n` using `x_j` jumps of size `j`. Enumeration is exhaustive and
//! serves as the brute-force oracle for the faster recurrences.

/// One element of `Ω(k, n)`: `x[j - 1]` is the number of size-`j` jumps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionIndex(Vec<usize>);

impl PartitionIndex {
    pub fn multiplicities(&self) -> &[usize] {
        &self.0
    }

    /// `Σ j·x_j`.
    pub fn total(&self) -> usize {
        self.0.iter().enumerate().map(|(i, x)| (i + 1) * x).sum()
    }

    /// Number of jumps `Σ x_j`.
    pub fn jumps(&self) -> usize {
        self.0.iter().sum()
    }
}

impl From<Vec<usize>> for PartitionIndex {
    fn from(x: Vec<usize>) -> Self {
        Self(x)
    }
}

/// All of `Ω(k, n)` in lexicographic order of the multiplicity vector.
pub fn enumerate_partitions(k: usize, n: usize) -> Vec<PartitionIndex> {
    let mut out = Vec::new();
    for_each_partition(k, n, |x| out.push(PartitionIndex(x.to_vec())));
    out
}

/// Visit every element of `Ω(k, n)` in lexicographic order without allocating per element.
pub fn for_each_partition(k: usize, n: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 {
        if n == 0 {
            visit(&[]);
        }
        return;
    }
    let mut x = vec![0; k];
    fill_partition(&mut x, 0, n, &mut visit);
}

fn fill_partition(x: &mut [usize], pos: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    let size = pos + 1;
    if pos + 1 == x.len() {
        if remaining.is_multiple_of(size) {
            x[pos] = remaining / size;
            visit(x);
            x[pos] = 0;
        }
        return;
    }
    for count in 0..=remaining / size {
        x[pos] = count;
        fill_partition(x, pos + 1, remaining - count * size, visit);
    }
    x[pos] = 0;
}

/// Visit every weak composition of `total` into `parts` non-negative integers,
/// in lexicographic order.
pub fn for_each_composition(parts: usize, total: usize, mut visit: impl FnMut(&[usize])) {
    if parts == 0 {
        if total == 0 {
            visit(&[]);
        }
        return;
    }
    let mut r = vec![0; parts];
    fill_composition(&mut r, 0, total, &mut visit);
}

fn fill_composition(r: &mut [usize], pos: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if pos + 1 == r.len() {
        r[pos] = remaining;
        visit(r);
        r[pos] = 0;
        return;
    }
    for count in 0..=remaining {
        r[pos] = count;
        fill_composition(r, pos + 1, remaining - count, visit);
    }
    r[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(k: usize, n: usize) -> Vec<Vec<usize>> {
        // every x with x_j <= n / j, filtered
        let mut out = Vec::new();
        let bounds: Vec<usize> = (1..=k).map(|j| n / j).collect();
        let mut x = vec![0usize; k];
        loop {
            if x.iter().enumerate().map(|(i, v)| (i + 1) * v).sum::<usize>() == n {
                out.push(x.clone());
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if x[i] < bounds[i] {
                    x[i] += 1;
                    break;
                }
                x[i] = 0;
            }
        }
    }

    #[test]
    fn small_cases() {
        assert_eq!(enumerate_partitions(3, 0), vec![PartitionIndex(vec![0, 0, 0])]);
        assert_eq!(enumerate_partitions(2, 2), vec![PartitionIndex(vec![0, 1]), PartitionIndex(vec![2, 0])]);
        assert_eq!(enumerate_partitions(1, 4), vec![PartitionIndex(vec![4])]);
    }

    #[test]
    fn matches_brute_force() {
        for k in 1..=4 {
            for n in 0..=12 {
                let got: Vec<Vec<usize>> = enumerate_partitions(k, n).into_iter().map(|p| p.0).collect();
                assert_eq!(got, brute_force(k, n), "k={k} n={n}");
                assert!(got.iter().all(|x| PartitionIndex(x.clone()).total() == n));
            }
        }
    }

    #[test]
    fn partition_counts() {
        // partitions of 10 into parts of size at most 3
        assert_eq!(enumerate_partitions(3, 10).len(), 14);
        // unrestricted partitions of 12
        assert_eq!(enumerate_partitions(12, 12).len(), 77);
    }

    #[test]
    fn compositions() {
        let mut seen = Vec::new();
        for_each_composition(3, 2, |r| seen.push(r.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 0, 2]);
        assert!(seen.iter().all(|r| r.iter().sum::<usize>() == 2));
        let mut empty = 0;
        for_each_composition(0, 0, |_| empty += 1);
        assert_eq!(empty, 1);
    }
}
