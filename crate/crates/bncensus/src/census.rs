//! Point-count census of linear-series loci over finite fields.
//!
//! For a fixed curve the gluing torus `(F_q^*)^g` is enumerated exhaustively;
//! each gluing vector contributes a stratum profile (section-space dimension
//! plus the vanishing-flag dimensions), and the number of `(r+1)`-dimensional
//! subspaces with prescribed flag incidences is counted by an exact Schubert
//! dynamic program. Counts across several primes feed a growth-based
//! dimension estimate compared against the expected dimension.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvemodel::{
    partial_normalization, quasistable_strata, random_curve, BinaryCurve, Component, MultiDegree,
    NodeSubset, Polarization,
};
use crate::exactalg::{enumerate_subspaces, Fp, Subspace};
use crate::ramification::{expected_dim, is_admissible};
use crate::sections::{
    block_sizes, section_space, vanishing_subspace, DivisorStep, SheafRep,
};
use crate::{Error, Result};

/// Dimension data of one torus fiber: `h^0` of the bundle and the
/// dimensions of the vanishing subspaces along the query's divisor steps.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct StratumProfile {
    pub h0: usize,
    pub flag_dims: Vec<usize>,
}

/// Which subset of pairs `(L, V)` to count.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum CountMode {
    /// All `V` of dimension `r+1` inside `H^0` meeting the ramification
    /// conditions.
    AtLeast,
    /// Only fibers with `h^0 = r+1` (so `V` is the full section space).
    ExactH0,
    /// Fibers with `h^0 = r+1` whose multi-vanishing sequence equals the
    /// query sequence exactly.
    ExactSequence,
    /// Fibers with `h^0 > r+1`.
    Boundary,
}

fn validate_steps(d_seq: &[DivisorStep]) -> Result<()> {
    for w in d_seq.windows(2) {
        if !w[0].le(&w[1]) || w[0].deg() >= w[1].deg() {
            return Err(Error::NonMonotoneDivisors);
        }
    }
    Ok(())
}

/// Divisor steps prefixed with the zero divisor, and the matching
/// per-step dimensions `[h0, flag_dims...]`.
fn prefixed(d_seq: &[DivisorStep], profile: &StratumProfile) -> (Vec<DivisorStep>, Vec<usize>) {
    if d_seq.first() == Some(&DivisorStep::zero()) {
        (d_seq.to_vec(), profile.flag_dims.clone())
    } else {
        let mut steps = Vec::with_capacity(d_seq.len() + 1);
        steps.push(DivisorStep::zero());
        steps.extend_from_slice(d_seq);
        let mut dims = Vec::with_capacity(d_seq.len() + 1);
        dims.push(profile.h0);
        dims.extend_from_slice(&profile.flag_dims);
        (steps, dims)
    }
}

/// Multi-vanishing sequence read off a filtration-dimension vector.
fn mv_from_dims(steps: &[DivisorStep], dims: &[usize]) -> Vec<u64> {
    let mut out = Vec::with_capacity(dims.first().copied().unwrap_or(0));
    for l in 0..steps.len() {
        let mult = if l + 1 < steps.len() {
            dims[l] - dims[l + 1]
        } else {
            dims[l]
        };
        for _ in 0..mult {
            out.push(steps[l].deg());
        }
    }
    out
}

fn profile_of(
    x: &BinaryCurve,
    dd: MultiDegree,
    kernels: &[Subspace],
    lam: Vec<Fp>,
) -> Result<StratumProfile> {
    let s = SheafRep::line_bundle(x.num_nodes(), dd, lam)?;
    let v = section_space(x, &s)?;
    let flag_dims = kernels
        .iter()
        .map(|k| v.subspace().intersection_dim(k))
        .collect::<Result<Vec<usize>>>()?;
    Ok(StratumProfile {
        h0: v.h0(),
        flag_dims,
    })
}

/// Enumerate the inner odometer over `free` gluing coordinates, the first
/// coordinates of the vector being fixed.
fn accumulate_chunk(
    x: &BinaryCurve,
    dd: MultiDegree,
    kernels: &[Subspace],
    prefix: &[Fp],
    free: usize,
) -> Result<BTreeMap<StratumProfile, u64>> {
    let p = x.prime();
    let mut map: BTreeMap<StratumProfile, u64> = BTreeMap::new();
    let mut idx = vec![1u64; free];
    loop {
        let mut lam = Vec::with_capacity(1 + prefix.len() + free);
        lam.push(Fp::one(p));
        lam.extend_from_slice(prefix);
        lam.extend(idx.iter().map(|&v| Fp::from_u64(v, p)));
        let profile = profile_of(x, dd, kernels, lam)?;
        *map.entry(profile).or_insert(0) += 1;
        // odometer advance, least significant last
        let mut i = free;
        loop {
            if i == 0 {
                return Ok(map);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < p {
                break;
            }
            idx[i] = 1;
        }
    }
}

/// Exhaustive histogram of stratum profiles over the normalized gluing
/// torus `(F_q^*)^{\#nodes - 1}` of `x`. Chunks over the first free
/// coordinate run in parallel; partial maps merge in index order.
pub fn torus_histogram(
    x: &BinaryCurve,
    dd: MultiDegree,
    d_seq: &[DivisorStep],
    budget: u64,
) -> Result<BTreeMap<StratumProfile, u64>> {
    validate_steps(d_seq)?;
    let p = x.prime();
    let free = x.num_nodes() - 1;
    let mut needed: u64 = 1;
    for _ in 0..free {
        needed = needed.checked_mul(p - 1).ok_or(Error::BudgetExceeded {
            needed: u64::MAX,
            budget,
        })?;
    }
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let (b1, b2) = block_sizes(dd);
    let full = Subspace::full(b1 + b2, p);
    let kernels = d_seq
        .iter()
        .map(|d| vanishing_subspace(x, dd, &full, d))
        .collect::<Result<Vec<Subspace>>>()?;
    if free == 0 {
        return accumulate_chunk(x, dd, &kernels, &[], 0);
    }
    let chunks: Vec<Result<BTreeMap<StratumProfile, u64>>> = (1..p)
        .into_par_iter()
        .map(|v| accumulate_chunk(x, dd, &kernels, &[Fp::from_u64(v, p)], free - 1))
        .collect();
    let mut map = BTreeMap::new();
    for chunk in chunks {
        for (k, v) in chunk? {
            *map.entry(k).or_insert(0) += v;
        }
    }
    Ok(map)
}

/// Number of `k`-dimensional subspaces of `F_q^n` meeting a nested flag
/// with member dimensions `flag_dims` in dimension at least `required`,
/// by a pivot-position dynamic program. With no conditions this is the
/// Gaussian binomial.
pub fn schubert_count(
    n: usize,
    k: usize,
    flag_dims: &[usize],
    required: &[usize],
    q: u64,
) -> Result<BigUint> {
    if flag_dims.len() != required.len() {
        return Err(Error::OutOfRange(
            "flag dimensions and requirements differ in length".into(),
        ));
    }
    if q < 2 {
        return Err(Error::OutOfRange("need q >= 2".into()));
    }
    if k > n {
        return Ok(BigUint::zero());
    }
    // one requirement per flag dimension, keeping the strongest
    let mut by_dim: BTreeMap<usize, usize> = BTreeMap::new();
    for (&m, &r) in flag_dims.iter().zip(required) {
        if m > n {
            return Err(Error::OutOfRange(format!(
                "flag dimension {m} exceeds ambient {n}"
            )));
        }
        if r > 0 {
            let e = by_dim.entry(m).or_insert(0);
            *e = (*e).max(r);
        }
    }
    if by_dim.get(&0).copied().unwrap_or(0) > 0 {
        return Ok(BigUint::zero());
    }
    // realize the flag member of dim m as the span of the last m coordinates;
    // a pivot set S gives dim(V cap W_m) = #{s in S : s > n-m}. Scan
    // positions from n down to 1; after t positions the requirement at
    // dim m = t applies. A pivot placed with c earlier (higher) pivots
    // carries weight q^{(t-1)-c} for its free entries.
    let qb = BigUint::from(q);
    let mut dp = vec![BigUint::zero(); k + 1];
    dp[0] = BigUint::one();
    for t in 1..=n {
        for c in (1..=k).rev() {
            if !dp[c - 1].is_zero() {
                let add = &dp[c - 1] * qb.pow((t - c) as u32);
                dp[c] += add;
            }
        }
        if let Some(&r) = by_dim.get(&t) {
            for slot in dp.iter_mut().take(r.min(k + 1)) {
                *slot = BigUint::zero();
            }
        }
    }
    Ok(dp[k].clone())
}

/// Brute-force oracle for [`schubert_count`]: full enumeration of the
/// Grassmannian over a prime field, flag members realized as coordinate
/// tails.
pub fn schubert_count_brute(
    n: usize,
    k: usize,
    flag_dims: &[usize],
    required: &[usize],
    q: u64,
) -> Result<BigUint> {
    if k > n {
        return Ok(BigUint::zero());
    }
    let flags: Vec<Subspace> = flag_dims
        .iter()
        .map(|&m| {
            let rows: Vec<Vec<Fp>> = (n - m..n)
                .map(|i| {
                    let mut row = vec![Fp::zero(q); n];
                    row[i] = Fp::one(q);
                    row
                })
                .collect();
            Subspace::from_rows(rows, n, q)
        })
        .collect();
    let mut count = BigUint::zero();
    for v in enumerate_subspaces(n, k, q)? {
        let mut ok = true;
        for (w, &r) in flags.iter().zip(required) {
            if v.intersection_dim(w)? < r {
                ok = false;
                break;
            }
        }
        if ok {
            count += BigUint::one();
        }
    }
    Ok(count)
}

fn schubert_inputs(
    steps: &[DivisorStep],
    dims: &[usize],
    a: &[u64],
    k: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut flag = Vec::with_capacity(a.len());
    let mut req = Vec::with_capacity(a.len());
    for (j, &aj) in a.iter().enumerate() {
        let l = steps
            .iter()
            .position(|d| d.deg() == aj)
            .ok_or_else(|| Error::Inadmissible(format!("no divisor of degree {aj}")))?;
        flag.push(dims[l]);
        req.push(k - j);
    }
    Ok((flag, req))
}

/// Exact point count of the locus of pairs `(L, V)` on `x` of multidegree
/// `dd` with `dim V = r+1`, filtered per `mode`, with the ramification
/// condition `(d_seq, a)` when `a` is nonempty.
pub fn count_points(
    x: &BinaryCurve,
    dd: MultiDegree,
    r: i64,
    d_seq: &[DivisorStep],
    a: &[u64],
    mode: CountMode,
    budget: u64,
) -> Result<BigUint> {
    if r < 0 {
        return Err(Error::OutOfRange("need r >= 0".into()));
    }
    let k = (r + 1) as usize;
    if !a.is_empty() {
        if a.len() != k {
            return Err(Error::OutOfRange(format!(
                "sequence has {} entries, expected {}",
                a.len(),
                k
            )));
        }
        if !is_admissible(a, d_seq)? {
            return Err(Error::Inadmissible("sequence not admissible".into()));
        }
    }
    let q = x.prime();
    let hist = torus_histogram(x, dd, d_seq, budget)?;
    let mut total = BigUint::zero();
    for (profile, &tcount) in &hist {
        let (steps, dims) = prefixed(d_seq, profile);
        let keep = match mode {
            CountMode::AtLeast => true,
            CountMode::ExactH0 => profile.h0 == k,
            CountMode::Boundary => profile.h0 > k,
            CountMode::ExactSequence => {
                profile.h0 == k && (a.is_empty() || mv_from_dims(&steps, &dims) == a)
            }
        };
        if !keep {
            continue;
        }
        let (flag, req) = schubert_inputs(&steps, &dims, a, k)?;
        let w = schubert_count(profile.h0, k, &flag, &req, q)?;
        total += w * BigUint::from(tcount);
    }
    Ok(total)
}

/// Tiny-case oracle for [`count_points`]: enumerates every gluing vector
/// and every candidate subspace explicitly.
pub fn count_points_brute(
    x: &BinaryCurve,
    dd: MultiDegree,
    r: i64,
    d_seq: &[DivisorStep],
    a: &[u64],
    mode: CountMode,
) -> Result<BigUint> {
    validate_steps(d_seq)?;
    let k = (r + 1) as usize;
    let p = x.prime();
    let n_free = x.num_nodes() - 1;
    let (b1, b2) = block_sizes(dd);
    let amb = b1 + b2;
    let full = Subspace::full(amb, p);
    let kernels = d_seq
        .iter()
        .map(|d| vanishing_subspace(x, dd, &full, d))
        .collect::<Result<Vec<Subspace>>>()?;
    let mut tuples = vec![vec![Fp::one(p)]];
    for _ in 0..n_free {
        let mut next = Vec::new();
        for t in &tuples {
            for v in 1..p {
                let mut w = t.clone();
                w.push(Fp::from_u64(v, p));
                next.push(w);
            }
        }
        tuples = next;
    }
    let mut total = BigUint::zero();
    for lam in tuples {
        let s = SheafRep::line_bundle(x.num_nodes(), dd, lam)?;
        let vf = section_space(x, &s)?;
        let h0 = vf.h0();
        if h0 < k {
            continue;
        }
        for sub in enumerate_subspaces(h0, k, p)? {
            // express the abstract subspace in the ambient coefficient space
            let rows: Vec<Vec<Fp>> = sub
                .basis_rows()
                .map(|coeffs| {
                    let mut row = vec![Fp::zero(p); amb];
                    for (i, &c) in coeffs.iter().enumerate() {
                        for (j, &b) in vf.subspace().basis().row(i).iter().enumerate() {
                            row[j] = row[j] + c * b;
                        }
                    }
                    row
                })
                .collect();
            let v = Subspace::from_rows(rows, amb, p);
            let mut flag_dims = Vec::with_capacity(kernels.len());
            for kspace in &kernels {
                flag_dims.push(v.intersection_dim(kspace)?);
            }
            let profile = StratumProfile { h0, flag_dims };
            let (steps, dims_full) = prefixed(d_seq, &profile);
            // dims of V itself along the flag (profile stores V's dims here)
            let mut vdims = dims_full.clone();
            vdims[0] = k;
            let met = if a.is_empty() {
                true
            } else {
                a.iter().enumerate().all(|(j, &aj)| {
                    steps
                        .iter()
                        .position(|d| d.deg() == aj)
                        .map(|l| vdims[l] >= k - j)
                        .unwrap_or(false)
                })
            };
            let keep = match mode {
                CountMode::AtLeast => met,
                CountMode::ExactH0 => met && h0 == k,
                CountMode::Boundary => met && h0 > k,
                CountMode::ExactSequence => {
                    h0 == k && (a.is_empty() || mv_from_dims(&steps, &vdims) == a)
                }
            };
            if keep {
                total += BigUint::one();
            }
        }
    }
    Ok(total)
}

/// Per-stratum counts of the compactified locus: one term per quasistable
/// pair `(J, dd_J)`, counted on the partial normalization `X_J`.
#[allow(clippy::too_many_arguments)]
pub fn strata_counts(
    x: &BinaryCurve,
    d: i64,
    e: &Polarization,
    p_component: Component,
    r: i64,
    d_seq: &[DivisorStep],
    a: &[u64],
    budget: u64,
) -> Result<Vec<((NodeSubset, MultiDegree), BigUint)>> {
    let strata = quasistable_strata(d, x.genus(), e, p_component);
    let mut out = Vec::with_capacity(strata.len());
    for (j, dd) in strata {
        let xj = partial_normalization(x, &j)?;
        let n = count_points(&xj, dd, r, d_seq, a, CountMode::AtLeast, budget)?;
        out.push(((j, dd), n));
    }
    Ok(out)
}

/// Total point count of the compactified locus: the disjoint union over
/// all quasistable strata.
#[allow(clippy::too_many_arguments)]
pub fn count_points_compactified(
    x: &BinaryCurve,
    d: i64,
    e: &Polarization,
    p_component: Component,
    r: i64,
    d_seq: &[DivisorStep],
    a: &[u64],
    budget: u64,
) -> Result<BigUint> {
    let mut total = BigUint::zero();
    for (_, n) in strata_counts(x, d, e, p_component, r, d_seq, a, budget)? {
        total += n;
    }
    Ok(total)
}

/// How much to trust a growth-based dimension estimate.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Confidence {
    /// Every count is zero: the locus is empty at the tested primes.
    Exact,
    /// All primes agree on the rounded growth exponent and each count lies
    /// within a factor of 8 of `q^dim`.
    Consistent,
    /// Primes disagree or a count falls outside the band.
    Inconsistent,
}

fn log_big(n: &BigUint) -> f64 {
    if let Some(f) = n.to_f64() {
        if f.is_finite() && f > 0.0 {
            return f.ln();
        }
    }
    n.bits() as f64 * std::f64::consts::LN_2
}

/// Growth-based dimension estimate from counts at several primes:
/// `dim ~ round(log N(q) / log q)` at the largest prime, with agreement
/// and a `[1/8, 8]` band at every prime required for confidence.
pub fn estimate_dimension(counts: &[(u64, BigUint)]) -> Result<(Option<i64>, Confidence)> {
    if counts.is_empty() {
        return Err(Error::InsufficientData("no counts supplied".into()));
    }
    let nonzero: Vec<&(u64, BigUint)> = counts.iter().filter(|(_, n)| !n.is_zero()).collect();
    if nonzero.is_empty() {
        return Ok((None, Confidence::Exact));
    }
    if nonzero.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two primes with nonzero counts".into(),
        ));
    }
    let (q_max, n_max) = nonzero
        .iter()
        .max_by_key(|(q, _)| *q)
        .map(|(q, n)| (*q, n))
        .unwrap();
    let dim = (log_big(n_max) / (q_max as f64).ln()).round() as i64;
    if nonzero.len() != counts.len() {
        // some primes see points and others see none
        return Ok((Some(dim), Confidence::Inconsistent));
    }
    let eight = BigUint::from(8u32);
    for (q, n) in counts {
        let local = (log_big(n) / (*q as f64).ln()).round() as i64;
        if local != dim {
            return Ok((Some(dim), Confidence::Inconsistent));
        }
        let qd = BigUint::from(*q).pow(dim as u32);
        // 1/8 <= N / q^dim <= 8, checked exactly
        if n * &eight < qd || n > &(&qd * &eight) {
            return Ok((Some(dim), Confidence::Inconsistent));
        }
    }
    Ok((Some(dim), Confidence::Consistent))
}

/// Full description of a census run; identical queries give identical
/// reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusQuery {
    pub g: usize,
    pub dd: MultiDegree,
    pub r: i64,
    pub d_seq: Vec<DivisorStep>,
    pub a: Vec<u64>,
    pub mode: CountMode,
    pub primes: Vec<u64>,
    pub seeds: Vec<u64>,
    pub budget: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrimeCount {
    pub q: u64,
    pub count: String,
}

/// Outcome for one requested seed, after any discards.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed_requested: u64,
    pub seed_used: u64,
    pub discards: u64,
    pub counts: Vec<PrimeCount>,
    pub dim_estimate: Option<i64>,
    pub confidence: Confidence,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub query: CensusQuery,
    pub expected_rho: i64,
    pub runs: Vec<RunRecord>,
    /// "verified" when every run is empty or Consistent with estimate = rho.
    pub verdict: String,
}

fn run_one_seed(query: &CensusQuery, seed: u64) -> Result<RunRecord> {
    // an Inconsistent estimate means the random curve was special:
    // redraw with the next seed, up to three consecutive discards
    let mut cur = seed;
    let mut discards = 0u64;
    loop {
        let mut counts = Vec::with_capacity(query.primes.len());
        for &p in &query.primes {
            let x = random_curve(query.g, p, cur)?;
            let n = count_points(
                &x,
                query.dd,
                query.r,
                &query.d_seq,
                &query.a,
                query.mode,
                query.budget,
            )?;
            counts.push((p, n));
        }
        // a single nonzero prime cannot support an estimate; treat it like
        // an inconsistent draw and redraw the curve
        let (dim, conf) = match estimate_dimension(&counts) {
            Ok(pair) => pair,
            Err(Error::InsufficientData(_)) => (None, Confidence::Inconsistent),
            Err(e) => return Err(e),
        };
        if conf == Confidence::Inconsistent {
            discards += 1;
            if discards >= 3 {
                return Err(Error::TooManyDiscards { last_seed: cur });
            }
            cur += 1;
            continue;
        }
        return Ok(RunRecord {
            seed_requested: seed,
            seed_used: cur,
            discards,
            counts: counts
                .into_iter()
                .map(|(q, n)| PrimeCount {
                    q,
                    count: n.to_string(),
                })
                .collect(),
            dim_estimate: dim,
            confidence: conf,
        });
    }
}

/// Run the census for every requested seed and assemble the report.
pub fn run_census(query: &CensusQuery) -> Result<CensusReport> {
    let rho = expected_dim(query.g as i64, query.r, query.dd.total(), &query.a)?;
    let mut runs = Vec::with_capacity(query.seeds.len());
    for &seed in &query.seeds {
        runs.push(run_one_seed(query, seed)?);
    }
    let verified = runs.iter().all(|r| match r.confidence {
        Confidence::Exact => r.dim_estimate.is_none(),
        Confidence::Consistent => r.dim_estimate == Some(rho),
        Confidence::Inconsistent => false,
    });
    Ok(CensusReport {
        schema_version: 1,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        query: query.clone(),
        expected_rho: rho,
        runs,
        verdict: if verified { "verified" } else { "refuted" }.to_string(),
    })
}

/// The two families of loci known to exceed or defy the expected
/// dimension.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum CounterexampleKind {
    /// Very negative degree on one component: the locus has dimension
    /// `g + (r+1)(d_1 - g - r - 1)`, exceeding `rho`.
    ExcessDimension,
    /// A ramification condition with negative expected dimension whose
    /// locus is nonetheless nonempty.
    NegativeExpectedDimension,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub schema_version: u32,
    pub kind: CounterexampleKind,
    pub query: CensusQuery,
    pub rho: i64,
    /// Closed-form dimension of the locus (excess-dimension kind only).
    pub predicted_dim: Option<i64>,
    pub runs: Vec<RunRecord>,
    pub measured_dim: Option<i64>,
    /// Excess-dimension kind: measured > rho at every seed.
    /// Negative-expected-dimension kind: nonempty at every prime and seed.
    pub inequality_holds: bool,
}

/// Census report for one of the known counterexample families, with the
/// family hypotheses validated up front.
pub fn counterexample_report(
    kind: CounterexampleKind,
    query: &CensusQuery,
) -> Result<CounterexampleReport> {
    let g = query.g as i64;
    let d = query.dd.total();
    let rho = expected_dim(g, query.r, d, &query.a)?;
    let predicted = match kind {
        CounterexampleKind::ExcessDimension => {
            if query.dd.d1 < g {
                return Err(Error::HypothesesViolated("need d1 >= g".into()));
            }
            if query.dd.d2 > -2 {
                return Err(Error::HypothesesViolated("need d2 <= -2".into()));
            }
            if d < g + query.r - 1 {
                return Err(Error::HypothesesViolated("need d >= g+r-1".into()));
            }
            if !query.a.is_empty() {
                return Err(Error::HypothesesViolated(
                    "excess-dimension family carries no ramification".into(),
                ));
            }
            Some(g + (query.r + 1) * (query.dd.d1 - g - query.r - 1))
        }
        CounterexampleKind::NegativeExpectedDimension => {
            if query.dd.d1 < g + 1 {
                return Err(Error::HypothesesViolated("need d1 >= g+1".into()));
            }
            if d < g + query.r {
                return Err(Error::HypothesesViolated("need d >= g+r".into()));
            }
            let last = query
                .d_seq
                .last()
                .ok_or_else(|| Error::HypothesesViolated("need a divisor sequence".into()))?;
            let rho_plain = expected_dim(g, query.r, d, &[])?;
            if (last.a2 as i64) <= rho_plain + query.r {
                return Err(Error::HypothesesViolated(format!(
                    "need the final P_2 coefficient to exceed rho + r = {}",
                    rho_plain + query.r
                )));
            }
            None
        }
    };
    let mut runs = Vec::with_capacity(query.seeds.len());
    for &seed in &query.seeds {
        runs.push(run_one_seed(query, seed)?);
    }
    let measured = runs.last().and_then(|r| r.dim_estimate);
    let holds = match kind {
        CounterexampleKind::ExcessDimension => runs
            .iter()
            .all(|r| r.dim_estimate.is_some_and(|m| m > rho)),
        CounterexampleKind::NegativeExpectedDimension => {
            rho < 0
                && runs.iter().all(|r| {
                    r.counts
                        .iter()
                        .all(|c| c.count != "0")
                })
        }
    };
    Ok(CounterexampleReport {
        schema_version: 1,
        kind,
        query: query.clone(),
        rho,
        predicted_dim: predicted,
        runs,
        measured_dim: measured,
        inequality_holds: holds,
    })
}
