#![allow(dead_code)]

use hypermatch::Hypergraph;

/// Counts perfect matchings by walking every partition of `0..n` into
/// blocks of size `k` (lowest free vertex first) and keeping those whose
/// blocks are all edges. Shares nothing with the library solver beyond edge
/// lookup.
pub fn naive_pm_count(h: &Hypergraph) -> u128 {
    let (k, n) = (h.k(), h.n());
    if n % k != 0 {
        return 0;
    }
    let mut used = vec![false; n];
    let mut block = Vec::with_capacity(k);
    partitions(h, k, &mut used, &mut block)
}

fn partitions(h: &Hypergraph, k: usize, used: &mut [bool], block: &mut Vec<u32>) -> u128 {
    let Some(first) = used.iter().position(|&u| !u) else {
        return 1;
    };
    used[first] = true;
    block.clear();
    block.push(first as u32);
    let total = grow(h, k, used, block, first + 1);
    used[first] = false;
    total
}

fn grow(h: &Hypergraph, k: usize, used: &mut [bool], block: &mut Vec<u32>, from: usize) -> u128 {
    if block.len() == k {
        if !h.contains_edge(block) {
            return 0;
        }
        let saved = block.clone();
        let mut inner = Vec::with_capacity(k);
        let count = partitions(h, k, used, &mut inner);
        *block = saved;
        return count;
    }
    let mut total = 0;
    for v in from..used.len() {
        if used[v] {
            continue;
        }
        used[v] = true;
        block.push(v as u32);
        total += grow(h, k, used, block, v + 1);
        block.pop();
        used[v] = false;
    }
    total
}

/// `n! / ((n/k)! (k!)^(n/k))`.
pub fn complete_pm_count(k: usize, n: usize) -> u128 {
    let fact = |m: usize| (1..=m as u128).product::<u128>();
    fact(n) / (fact(n / k) * fact(k).pow((n / k) as u32))
}
