/// Lexicographic `k`-subsets of the positions `start..end`, advanced in place.
#[derive(Debug, Clone)]
pub(crate) struct CombinationCursor {
    end: usize,
    indices: Vec<usize>,
    fresh: bool,
    exhausted: bool,
}

impl CombinationCursor {
    pub(crate) fn new(start: usize, end: usize, k: usize) -> Self {
        CombinationCursor {
            end,
            indices: (start..start + k).collect(),
            fresh: true,
            exhausted: start + k > end,
        }
    }

    pub(crate) fn next(&mut self) -> Option<&[usize]> {
        if self.exhausted {
            return None;
        }
        if self.fresh {
            self.fresh = false;
            return Some(&self.indices);
        }
        let k = self.indices.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.exhausted = true;
                return None;
            }
            i -= 1;
            if self.indices[i] < self.end - k + i {
                break;
            }
        }
        self.indices[i] += 1;
        for j in i + 1..k {
            self.indices[j] = self.indices[j - 1] + 1;
        }
        Some(&self.indices)
    }
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// `sum_{i=0..=k} C(n, i)`, saturating.
pub(crate) fn subsets_up_to(n: u64, k: u64) -> u64 {
    (0..=k.min(n)).fold(0u64, |acc, i| acc.saturating_add(binomial(n, i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    fn collect(start: usize, end: usize, k: usize) -> Vec<Vec<usize>> {
        let mut cur = CombinationCursor::new(start, end, k);
        let mut out = Vec::new();
        while let Some(c) = cur.next() {
            out.push(c.to_vec());
        }
        out
    }

    #[test]
    fn matches_itertools() {
        for n in 0..8 {
            for k in 0..=n + 1 {
                let expected: Vec<Vec<usize>> = (0..n).combinations(k).collect();
                assert_eq!(collect(0, n, k), expected, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn offset_range() {
        assert_eq!(collect(2, 5, 2), vec![vec![2, 3], vec![2, 4], vec![3, 4]]);
        assert_eq!(collect(3, 3, 0), vec![Vec::<usize>::new()]);
        assert!(collect(3, 3, 1).is_empty());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(60, 6), 50_063_860);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(subsets_up_to(3, 2), 7);
        assert_eq!(subsets_up_to(0, 5), 1);
        assert_eq!(binomial(200, 100), u64::MAX);
    }
}
