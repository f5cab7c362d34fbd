//! Small combinatorics helpers shared by the rest of the crate.

/// `C(n, r)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `f` with every `r`-subset of `items` in lexicographic order of
/// positions. Stops early when `f` returns `false`. Returns `false` iff it
/// was stopped.
pub fn for_each_combination<F>(items: &[u32], r: usize, mut f: F) -> bool
where
    F: FnMut(&[u32]) -> bool,
{
    let n = items.len();
    if r > n {
        return true;
    }
    if r == 0 {
        return f(&[]);
    }
    let mut idx: Vec<usize> = (0..r).collect();
    let mut buf: Vec<u32> = idx.iter().map(|&i| items[i]).collect();
    loop {
        if !f(&buf) {
            return false;
        }
        // advance the rightmost index that still has room
        let mut i = r;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
            if i == 0 {
                return true;
            }
        }
        idx[i] += 1;
        buf[i] = items[idx[i]];
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
            buf[j] = items[idx[j]];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(20, 3), 1140);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(512, 3), 22_238_720);
    }

    #[test]
    fn enumerates_all_subsets_in_order() {
        let items = [1, 3, 5, 7, 9];
        let mut seen = Vec::new();
        for_each_combination(&items, 3, |c| {
            seen.push(c.to_vec());
            true
        });
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![1, 3, 5]);
        assert_eq!(seen[9], vec![5, 7, 9]);
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(seen, sorted);
    }

    #[test]
    fn early_stop_and_edge_cases() {
        let items = [0, 1, 2, 3];
        let mut count = 0;
        let finished = for_each_combination(&items, 2, |_| {
            count += 1;
            count < 3
        });
        assert!(!finished);
        assert_eq!(count, 3);

        let mut empty = 0;
        for_each_combination(&items, 0, |c| {
            assert!(c.is_empty());
            empty += 1;
            true
        });
        assert_eq!(empty, 1);
        for_each_combination(&items, 5, |_| panic!("no 5-subsets of 4 items"));
        let mut full = 0;
        for_each_combination(&items, 4, |_| {
            full += 1;
            true
        });
        assert_eq!(full, 1);
    }

}
