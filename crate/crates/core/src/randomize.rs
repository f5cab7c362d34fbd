//! Random generation: edge sparsification, binomial random hypergraphs,
//! vertex vortices with a per-level report, and a typicality tester.

use std::collections::HashMap;

use num_rational::Ratio;
use rand::{Rng as _, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::combo::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VertexId};
use crate::rng::{Rng, RngSeed};
use crate::subset::VertexSubset;

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::BadProbability(p));
    }
    Ok(())
}

/// Keeps each edge of `h` independently with probability `p`.
pub fn sparsify(h: &Hypergraph, p: f64, rng: &mut Rng) -> Result<Hypergraph> {
    check_probability(p)?;
    let mut flat = Vec::new();
    h.for_each_edge(|e| {
        if rng.random::<f64>() < p {
            flat.extend_from_slice(e);
        }
        true
    });
    Ok(Hypergraph::from_sorted_flat(h.k(), h.n(), flat))
}

/// `H^k(n, p)`.
pub fn random_hypergraph(n: usize, k: usize, p: f64, rng: &mut Rng) -> Result<Hypergraph> {
    check_probability(p)?;
    sparsify(&Hypergraph::complete(k, n)?, p, rng)
}

/// Knobs for the vortex report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VortexParams {
    pub d: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eps: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        VortexParams {
            d: 2,
            alpha1: 0.15,
            alpha2: 0.15,
            eps: 0.3,
        }
    }
}

/// `ceil((k-1)/k · log2 n)`, computed exactly as the least `ℓ` with
/// `2^(ℓk) >= n^(k-1)`.
pub fn vortex_levels(n: usize, k: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let target = (n as f64).log2() * (k - 1) as f64;
    let mut ell = ((target / k as f64).floor() as usize).saturating_sub(1);
    // Compare exactly where the integers fit, otherwise fall back to logs.
    let fits = |ell: usize| -> bool {
        match ((n as u128).checked_pow((k - 1) as u32), 1u128.checked_shl((ell * k) as u32)) {
            (Some(lhs), Some(rhs)) if ell * k < 127 => rhs >= lhs,
            _ => (ell * k) as f64 >= target,
        }
    };
    while !fits(ell) {
        ell += 1;
    }
    ell
}

/// `p_i = 2^(ℓ-i) / (2^ℓ - 1)` for `i = 1..=ℓ`, exactly.
pub fn vortex_probabilities(ell: usize) -> Vec<Ratio<u64>> {
    assert!((1..63).contains(&ell), "level count {ell} out of range");
    let denom = (1u64 << ell) - 1;
    (1..=ell).map(|i| Ratio::new(1u64 << (ell - i), denom)).collect()
}

/// Largest level count `ℓ' <= ℓ` whose last level still expects at least
/// `2k` vertices. Small instances need this because the formula's last level
/// would otherwise be smaller than a single edge.
pub fn clamped_levels(n: usize, k: usize) -> usize {
    let mut ell = vortex_levels(n, k);
    while ell > 1 {
        let p_last = *vortex_probabilities(ell).last().expect("ell >= 1");
        if (p_last * n as u64).to_integer() >= 2 * k as u64 {
            break;
        }
        ell -= 1;
    }
    ell
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub size: usize,
    pub expected: f64,
    pub v1_ok: bool,
    /// d-sets of `U_i` whose degree in `H[U_i]` falls below the threshold.
    /// Absent on the last level, where the low-degree count does not apply.
    pub v2_low_sets: Option<u64>,
    pub v2_allowed: Option<f64>,
    pub v2_ok: bool,
    /// Minimum over all vertices `v` of `d_H(v; (U_i \ {v} choose k-1))`.
    pub v3_min_degree: u64,
    pub v3_threshold: f64,
    pub v3_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VortexReport {
    pub params: VortexParams,
    pub levels: Vec<LevelReport>,
    pub v1_ok: bool,
    pub v2_ok: bool,
    pub v3_ok: bool,
}

impl VortexReport {
    pub fn all_ok(&self) -> bool {
        self.v1_ok && self.v2_ok && self.v3_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vortex {
    pub parts: Vec<VertexSubset>,
    pub ell: usize,
    pub p_exact: Vec<Ratio<u64>>,
    pub p_vec: Vec<f64>,
    pub report: VortexReport,
}

impl Vortex {
    pub fn n(&self) -> usize {
        self.parts.first().map_or(0, VertexSubset::universe)
    }

    /// The last level `U_ℓ`.
    pub fn last(&self) -> &VertexSubset {
        self.parts.last().expect("a vortex has at least one level")
    }

    /// 0-based level of every vertex.
    pub fn level_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for (i, p) in self.parts.iter().enumerate() {
            for v in p.iter() {
                out[v as usize] = i;
            }
        }
        out
    }
}

impl Serialize for Vortex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Vortex", 4)?;
        st.serialize_field("ell", &self.ell)?;
        st.serialize_field("p_vec", &self.p_vec)?;
        st.serialize_field("parts", &self.parts)?;
        st.serialize_field("report", &self.report)?;
        st.end()
    }
}

/// Random vortex with the level count from the existence lemma.
pub fn vortex_partition(h: &Hypergraph, params: VortexParams, rng: &mut Rng) -> Result<Vortex> {
    vortex_with_levels(h, vortex_levels(h.n(), h.k()), params, rng)
}

/// Random vortex with an explicit level count `ell`.
///
/// Each vertex independently lands in level `i` with probability `p_i`. The
/// draw is one uniform integer in `[0, 2^ℓ - 1)` split into blocks of sizes
/// `2^(ℓ-1), .., 2, 1`, so the sampling is exact.
pub fn vortex_with_levels(
    h: &Hypergraph,
    ell: usize,
    params: VortexParams,
    rng: &mut Rng,
) -> Result<Vortex> {
    let (n, k) = (h.n(), h.k());
    if params.d == 0 || params.d >= k {
        return Err(Error::BadArity { d: params.d, max: k - 1 });
    }
    if !(2..63).contains(&ell) {
        return Err(Error::TooSmall(format!("vortex needs at least 2 levels, got {ell}")));
    }
    let p_exact = vortex_probabilities(ell);
    let last = p_exact[ell - 1] * n as u64;
    if last < Ratio::from_integer(k as u64) {
        return Err(Error::TooSmall(format!(
            "last level expects {:.2} vertices, fewer than k = {k}",
            *last.numer() as f64 / *last.denom() as f64
        )));
    }
    let p_vec: Vec<f64> = p_exact.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect();
    let total = (1u64 << ell) - 1;
    let mut parts = vec![VertexSubset::empty(n); ell];
    for v in 0..n as u32 {
        let mut x = rng.random_range(0..total);
        let mut level = 0;
        loop {
            let block = 1u64 << (ell - 1 - level);
            if x < block {
                break;
            }
            x -= block;
            level += 1;
        }
        parts[level].insert(v);
    }
    let report = vortex_report(h, &parts, &p_vec, params);
    Ok(Vortex {
        parts,
        ell,
        p_exact,
        p_vec,
        report,
    })
}

/// Checks level sizes (`v1`), low-degree sets into the next level (`v2`)
/// and the degree floor inside each level (`v3`) for a given partition.
pub fn vortex_report(
    h: &Hypergraph,
    parts: &[VertexSubset],
    p_vec: &[f64],
    params: VortexParams,
) -> VortexReport {
    let (n, k, d) = (h.n(), h.k(), params.d);
    let ell = parts.len();
    let level_of: Vec<usize> = {
        let mut out = vec![usize::MAX; n];
        for (i, p) in parts.iter().enumerate() {
            for v in p.iter() {
                out[v as usize] = i;
            }
        }
        out
    };

    // v3[v][i] = number of (k-1)-sets inside U_i \ {v} completing v to an edge.
    let v3_min: Vec<u64> = if h.is_implicit_complete() {
        parts
            .iter()
            .map(|p| {
                let s = p.len() as u64;
                if s == 0 {
                    0
                } else if s == n as u64 {
                    binomial(s - 1, (k - 1) as u64)
                } else {
                    binomial(s - 1, (k - 1) as u64).min(binomial(s, (k - 1) as u64))
                }
            })
            .collect()
    } else {
        let mut deg = vec![0u64; n * ell];
        h.for_each_edge(|e| {
            for (j, &v) in e.iter().enumerate() {
                let mut lvl = None;
                let same = e.iter().enumerate().filter(|&(i, _)| i != j).all(|(_, &u)| {
                    let l = level_of[u as usize];
                    *lvl.get_or_insert(l) == l
                });
                if same {
                    if let Some(l) = lvl {
                        deg[v as usize * ell + l] += 1;
                    }
                }
            }
            true
        });
        (0..ell).map(|i| (0..n).map(|v| deg[v * ell + i]).min().unwrap_or(0)).collect()
    };

    let levels: Vec<LevelReport> = parts
        .iter()
        .enumerate()
        .map(|(i, part)| {
            let size = part.len();
            let expected = p_vec[i] * n as f64;
            let v1_ok = (size as f64 - expected).abs() <= params.eps * expected;
            let (v2_low_sets, v2_allowed, v2_ok) = if i + 1 < ell {
                let threshold = (params.alpha1 - params.eps) * expected.powi((k - d) as i32);
                let allowed = params.eps * expected.powi(d as i32);
                let low = low_degree_sets(h, part, d, threshold);
                (Some(low), Some(allowed), low as f64 <= allowed)
            } else {
                (None, None, true)
            };
            let v3_threshold = (params.alpha2 - params.eps) * expected.powi((k - 1) as i32);
            let v3_min_degree = v3_min[i];
            LevelReport {
                level: i + 1,
                size,
                expected,
                v1_ok,
                v2_low_sets,
                v2_allowed,
                v2_ok,
                v3_min_degree,
                v3_threshold,
                v3_ok: v3_min_degree as f64 >= v3_threshold,
            }
        })
        .collect();
    VortexReport {
        params,
        v1_ok: levels.iter().all(|l| l.v1_ok),
        v2_ok: levels.iter().all(|l| l.v2_ok),
        v3_ok: levels.iter().all(|l| l.v3_ok),
        levels,
    }
}

/// Number of d-subsets of `part` with degree in `H[part]` below `threshold`.
fn low_degree_sets(h: &Hypergraph, part: &VertexSubset, d: usize, threshold: f64) -> u64 {
    let size = part.len() as u64;
    let k = h.k();
    let total = binomial(size, d as u64);
    if threshold <= 0.0 {
        return 0;
    }
    if h.is_implicit_complete() {
        let deg = binomial(size.saturating_sub(d as u64), (k - d) as u64);
        return if (deg as f64) < threshold { total } else { 0 };
    }
    let mut deg: HashMap<Vec<VertexId>, u64> = HashMap::new();
    h.for_each_edge(|e| {
        if part.contains_all(e) {
            for_each_combination(e, d, |s| {
                *deg.entry(s.to_vec()).or_default() += 1;
                true
            });
        }
        true
    });
    let high = deg.values().filter(|&&c| c as f64 >= threshold).count() as u64;
    total - high
}

/// Fraction of `trials` in which a `p`-random vertex subset `U` of `0..n` is
/// `(p, eps, F)`-typical: the number of members of `family` inside `U` is
/// within a factor `1 ± eps` of `Σ_{S ∈ F} p^{|S|}`. An empty family counts
/// as typical.
pub fn typicality_test(
    n: usize,
    family: &[Vec<VertexId>],
    p: f64,
    eps: f64,
    trials: usize,
    rng: &mut Rng,
) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::BadProbability(p));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if let Some(bad) = family.iter().find(|s| s.iter().any(|&v| v as usize >= n)) {
        return Err(Error::BadFamily(format!("member {bad:?} leaves 0..{n}")));
    }
    if let Some(first) = family.first() {
        if family.iter().any(|s| s.len() != first.len()) {
            return Err(Error::BadFamily("members must have a common size".into()));
        }
    }
    if family.is_empty() {
        return Ok(1.0);
    }
    let expected: f64 = family.iter().map(|s| p.powi(s.len() as i32)).sum();
    let base = rng.next_u64();
    let typical = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut r = RngSeed::new(base, t as u64).rng();
            let u = VertexSubset::from_iter(n, (0..n as u32).filter(|_| r.random::<f64>() < p));
            let inside = family.iter().filter(|s| u.contains_all(s)).count() as f64;
            (inside - expected).abs() <= eps * expected
        })
        .count();
    Ok(typical as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::complete;

    #[test]
    fn sparsify_extremes() {
        let mut rng = RngSeed::new(1, 0).rng();
        let h = complete(8, 3).unwrap();
        assert_eq!(sparsify(&h, 1.0, &mut rng).unwrap(), h);
        assert_eq!(sparsify(&h, 0.0, &mut rng).unwrap().edge_count(), 0);
        assert!(matches!(sparsify(&h, 1.5, &mut rng), Err(Error::BadProbability(_))));
        assert!(matches!(sparsify(&h, -0.1, &mut rng), Err(Error::BadProbability(_))));
    }

    #[test]
    fn sparsify_keeps_a_subset() {
        let mut rng = RngSeed::new(2, 0).rng();
        let h = random_hypergraph(10, 3, 0.5, &mut rng).unwrap();
        let s = sparsify(&h, 0.3, &mut rng).unwrap();
        assert!(s.edges().iter().all(|e| h.contains_edge(e)));
    }

    #[test]
    fn random_hypergraph_extremes() {
        let mut rng = RngSeed::new(3, 0).rng();
        assert_eq!(random_hypergraph(9, 3, 1.0, &mut rng).unwrap(), complete(9, 3).unwrap());
        assert_eq!(random_hypergraph(9, 3, 0.0, &mut rng).unwrap().edge_count(), 0);
    }

    #[test]
    fn level_formula() {
        assert_eq!(vortex_levels(1024, 3), 7);
        assert_eq!(vortex_levels(512, 3), 6);
        assert_eq!(vortex_levels(24, 3), 4);
        // brute force against floating point on a grid away from ties
        for n in 2..3000usize {
            for k in 2..6usize {
                let exact = vortex_levels(n, k);
                assert!(2f64.powi((exact * k) as i32) >= (n as f64).powi(k as i32 - 1) * (1.0 - 1e-12));
                if exact > 0 {
                    assert!(
                        2f64.powi(((exact - 1) * k) as i32) < (n as f64).powi(k as i32 - 1),
                        "n={n} k={k}"
                    );
                }
            }
        }
        assert_eq!(clamped_levels(24, 3), 2);
        assert_eq!(clamped_levels(1024, 3), 7);
    }

    #[test]
    fn probabilities_are_exact() {
        let p = vortex_probabilities(7);
        assert_eq!(p[0], Ratio::new(64, 127));
        assert_eq!(p.iter().copied().sum::<Ratio<u64>>(), Ratio::from_integer(1));
        for w in p.windows(2) {
            assert_eq!(w[0] / w[1], Ratio::from_integer(2));
        }
    }

    #[test]
    fn vortex_partitions_vertices() {
        let h = complete(1024, 3).unwrap();
        for seed in 0..5 {
            let mut rng = RngSeed::new(seed, 0).rng();
            let v = vortex_partition(&h, VortexParams::default(), &mut rng).unwrap();
            assert_eq!(v.ell, 7);
            assert_eq!(v.parts.iter().map(VertexSubset::len).sum::<usize>(), 1024);
            for i in 0..v.ell {
                for j in i + 1..v.ell {
                    assert!(v.parts[i].is_disjoint(&v.parts[j]));
                }
            }
            assert!(v.report.v2_ok && v.report.v3_ok);
        }
    }

    #[test]
    fn vortex_rejects_small_instances() {
        let mut rng = RngSeed::new(0, 0).rng();
        let h = complete(24, 3).unwrap();
        assert!(matches!(
            vortex_partition(&h, VortexParams::default(), &mut rng),
            Err(Error::TooSmall(_))
        ));
        assert!(vortex_with_levels(&h, clamped_levels(24, 3), VortexParams::default(), &mut rng).is_ok());
        assert!(matches!(
            vortex_with_levels(&h, 1, VortexParams::default(), &mut rng),
            Err(Error::TooSmall(_))
        ));
    }

    #[test]
    fn explicit_and_implicit_reports_agree() {
        let h = complete(40, 3).unwrap();
        let x = h.to_explicit();
        let params = VortexParams {
            d: 2,
            alpha1: 0.5,
            alpha2: 0.4,
            eps: 0.1,
        };
        for seed in 0..10 {
            let a = vortex_with_levels(&h, 2, params, &mut RngSeed::new(seed, 0).rng()).unwrap();
            let b = vortex_with_levels(&x, 2, params, &mut RngSeed::new(seed, 0).rng()).unwrap();
            assert_eq!(a.parts, b.parts);
            assert_eq!(a.report, b.report);
        }
    }

    #[test]
    fn typicality_examples() {
        let mut rng = RngSeed::new(9, 0).rng();
        assert_eq!(typicality_test(10, &[], 0.5, 0.1, 10, &mut rng).unwrap(), 1.0);
        let singles: Vec<Vec<u32>> = (0..1000).map(|v| vec![v]).collect();
        let f = typicality_test(1000, &singles, 0.5, 0.1, 500, &mut rng).unwrap();
        assert!(f >= 0.99, "{f}");
        assert!(matches!(typicality_test(10, &singles[..3], 0.0, 0.1, 10, &mut rng), Err(Error::BadProbability(_))));
        assert!(matches!(typicality_test(2, &singles[..3], 0.5, 0.1, 10, &mut rng), Err(Error::BadFamily(_))));
    }

    #[test]
    fn typicality_monotone_in_eps() {
        let pairs: Vec<Vec<u32>> = (0..60u32).flat_map(|a| (a + 1..60).map(move |b| vec![a, b])).collect();
        let mut last = 0.0;
        for eps in [0.02, 0.05, 0.1, 0.2, 0.4] {
            // same seed, so the same subsets are tested at each eps
            let f = typicality_test(60, &pairs, 0.5, eps, 400, &mut RngSeed::new(4, 0).rng()).unwrap();
            assert!(f >= last);
            last = f;
        }
    }
}
