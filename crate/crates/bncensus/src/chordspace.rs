//! The projective chord model: the two components embedded as rational
//! normal curves in complementary coordinate blocks of `k^{d+2}`, one chord
//! per node, osculating flags at the marked points, and the dictionary
//! between `(d-r)`-planes meeting every chord and linear series.
//!
//! The pairing underlying everything: a hyperplane of `P^{d+1}` is a
//! coefficient vector, and its restriction to the embedded components is
//! the pair of polynomials with those coefficients — so hyperplanes through
//! a plane `Lambda` are exactly the sections of the series it models.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curvemodel::{BinaryCurve, MultiDegree};
use crate::exactalg::{Fp, Subspace};
use crate::sections::{section_space, vanishing_subspace, DivisorStep, LinearSeries, SheafRep};
use crate::{Error, Result};

/// Embedding data: `Z_1` maps to coordinates `0..=d1`, `Z_2` to
/// `d1+1..=d1+d2+1` of `k^{d+2}`.
#[derive(Clone, Debug)]
pub struct ChordConfig {
    curve: BinaryCurve,
    d1: usize,
    d2: usize,
}

impl ChordConfig {
    pub fn new(curve: BinaryCurve, dd: MultiDegree) -> Result<Self> {
        if dd.d1 < 0 || dd.d2 < 0 {
            return Err(Error::OutOfRange(
                "chord model needs nonnegative degrees on both components".into(),
            ));
        }
        Ok(ChordConfig {
            curve,
            d1: dd.d1 as usize,
            d2: dd.d2 as usize,
        })
    }

    pub fn curve(&self) -> &BinaryCurve {
        &self.curve
    }

    pub fn multidegree(&self) -> MultiDegree {
        MultiDegree::new(self.d1 as i64, self.d2 as i64)
    }

    /// `d + 2`.
    pub fn ambient_dim(&self) -> usize {
        self.d1 + self.d2 + 2
    }

    fn block(&self, component: usize) -> (usize, usize) {
        match component {
            1 => (0, self.d1 + 1),
            2 => (self.d1 + 1, self.d2 + 1),
            _ => panic!("component must be 1 or 2"),
        }
    }

    fn prime(&self) -> u64 {
        self.curve.prime()
    }
}

/// `(1, t, t^2, ..., t^{d_i})` placed in the component's block.
pub fn embed_point(cfg: &ChordConfig, component: usize, t: Fp) -> Vec<Fp> {
    let p = cfg.prime();
    let (start, len) = cfg.block(component);
    let mut v = vec![Fp::zero(p); cfg.ambient_dim()];
    let mut pw = Fp::one(p);
    for k in 0..len {
        v[start + k] = pw;
        pw = pw * t;
    }
    v
}

/// The line joining the two embedded preimages of node `j`; always
/// 2-dimensional since the blocks are disjoint.
pub fn chord(cfg: &ChordConfig, j: usize) -> Result<Subspace> {
    if j >= cfg.curve.num_nodes() {
        return Err(Error::OutOfRange(format!("node index {j} out of range")));
    }
    let (q1, q2) = cfg.curve.node(j);
    Ok(Subspace::from_rows(
        vec![embed_point(cfg, 1, q1), embed_point(cfg, 2, q2)],
        cfg.ambient_dim(),
        cfg.prime(),
    ))
}

/// Pascal binomials `C(k, m)` for `k < b`, reduced mod `p`.
fn binomials(m: usize, b: usize, p: u64) -> Vec<Fp> {
    let mut row = vec![Fp::one(p)];
    let mut out = Vec::with_capacity(b);
    for k in 0..b {
        if k > 0 {
            let mut next = vec![Fp::zero(p); k + 1];
            next[0] = Fp::one(p);
            next[k] = Fp::one(p);
            for i in 1..k {
                next[i] = row[i - 1] + row[i];
            }
            row = next;
        }
        out.push(if m <= k { row[m] } else { Fp::zero(p) });
    }
    out
}

/// The `a`-dimensional osculating space of the component's rational normal
/// curve at `t`: the span of the order-`m` vanishing-condition rows for
/// `m < a`, so hyperplanes through it are exactly those whose sections
/// vanish to order `>= a` at `t`.
pub fn osculating_space(cfg: &ChordConfig, component: usize, t: Fp, a: usize) -> Result<Subspace> {
    let p = cfg.prime();
    let (start, len) = cfg.block(component);
    if a > len {
        return Err(Error::OutOfRange(format!(
            "order {a} exceeds block dimension {len}"
        )));
    }
    let mut rows = Vec::with_capacity(a);
    for m in 0..a {
        let binom = binomials(m, len, p);
        let mut row = vec![Fp::zero(p); cfg.ambient_dim()];
        for k in m..len {
            row[start + k] = binom[k] * t.pow((k - m) as u64);
        }
        rows.push(row);
    }
    Ok(Subspace::from_rows(rows, cfg.ambient_dim(), p))
}

/// Direct sum of the two osculating spaces at the given points;
/// dimension `b1 + b2`.
pub fn joined_flag(
    cfg: &ChordConfig,
    t1: Fp,
    t2: Fp,
    b1: usize,
    b2: usize,
) -> Result<Subspace> {
    let u1 = osculating_space(cfg, 1, t1, b1)?;
    let u2 = osculating_space(cfg, 2, t2, b2)?;
    u1.sum(&u2)
}

/// Read the series off a plane: each chord must meet `Lambda` in exactly
/// one point, interior to the chord; the ratio of its block components is
/// the gluing scalar, and the sections are the hyperplanes through
/// `Lambda`. The result is normalized so the first gluing scalar is 1.
pub fn plane_to_series(cfg: &ChordConfig, lambda_plane: &Subspace) -> Result<LinearSeries> {
    let p = cfg.prime();
    let amb = cfg.ambient_dim();
    if lambda_plane.ambient_dim() != amb {
        return Err(Error::AmbientMismatch {
            left: lambda_plane.ambient_dim(),
            right: amb,
        });
    }
    let n_nodes = cfg.curve.num_nodes();
    let mut glue = Vec::with_capacity(n_nodes);
    for j in 0..n_nodes {
        let meet = lambda_plane.intersect(&chord(cfg, j)?)?;
        match meet.dim() {
            0 => return Err(Error::ChordMissed { node: j }),
            2 => return Err(Error::AmbiguousChord { node: j }),
            _ => {}
        }
        let x = meet.basis().row(0);
        // x = alpha * embed(q1_j) + beta * embed(q2_j); the leading block
        // coordinates are exactly alpha and beta
        let alpha = x[0];
        let beta = x[cfg.d1 + 1];
        if alpha.is_zero() || beta.is_zero() {
            return Err(Error::BadPlane { node: j });
        }
        // hyperplanes c through x satisfy alpha f1(q1) + beta f2(q2) = 0
        glue.push(-(beta * alpha.inv()?));
    }
    let sections = lambda_plane.basis().kernel();
    if sections.dim() != amb - lambda_plane.dim() {
        return Err(Error::DegenerateSeries("kernel has wrong dimension".into()));
    }
    // normalize the global scaling so the first gluing scalar is 1:
    // (f1, f2) -> (f1 / lambda_0, f2) divides every scalar by lambda_0
    let lam0 = glue[0];
    let inv0 = lam0.inv()?;
    let norm: Vec<Fp> = glue.iter().map(|&l| l * inv0).collect();
    let rows: Vec<Vec<Fp>> = sections
        .basis_rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(i, &v)| if i <= cfg.d1 { v * inv0 } else { v })
                .collect()
        })
        .collect();
    let v = Subspace::from_rows(rows, amb, p);
    let sheaf = SheafRep::line_bundle(n_nodes, cfg.multidegree(), norm)?;
    Ok(LinearSeries { sheaf, v })
}

/// The plane cut out by a series: common zero locus of the hyperplanes
/// given by a section basis.
pub fn series_to_plane(cfg: &ChordConfig, ls: &LinearSeries) -> Result<Subspace> {
    if !ls.sheaf.freed_nodes().is_empty() {
        return Err(Error::DegenerateSeries(
            "only line-bundle series embed in the chord model".into(),
        ));
    }
    if ls.sheaf.multidegree() != cfg.multidegree() {
        return Err(Error::DegenerateSeries("multidegree mismatch".into()));
    }
    let amb = cfg.ambient_dim();
    if ls.v.ambient_dim() != amb {
        return Err(Error::AmbientMismatch {
            left: ls.v.ambient_dim(),
            right: amb,
        });
    }
    if ls.v.dim() == 0 {
        return Err(Error::DegenerateSeries("zero-dimensional section space".into()));
    }
    Ok(ls.v.basis().kernel())
}

/// Check the equivalence of the two ramification tests at the marked
/// points: incidence of `Lambda` with the joined osculating flag against
/// the vanishing dimension of the corresponding series. `lam` counts
/// projective dimension, so the linear-algebra incidence is `>= lam + 1`.
pub fn dictionary_check(
    cfg: &ChordConfig,
    lambda_plane: &Subspace,
    b1: usize,
    b2: usize,
    lam: usize,
) -> Result<bool> {
    if b1 > cfg.d1 || b2 > cfg.d2 {
        return Err(Error::OutOfRange(
            "dictionary requires b_i <= d_i".into(),
        ));
    }
    let ls = plane_to_series(cfg, lambda_plane)?;
    let (p1, p2) = cfg.curve.marked();
    let flag = joined_flag(cfg, p1, p2, b1, b2)?;
    let lhs = lambda_plane.intersection_dim(&flag)? > lam;
    let r = (cfg.ambient_dim() - lambda_plane.dim()) as i64 - 1;
    let vd = vanishing_subspace(
        cfg.curve(),
        cfg.multidegree(),
        &ls.v,
        &DivisorStep::new(b1 as u64, b2 as u64),
    )?
    .dim() as i64;
    let rhs = vd >= r + 1 - (b1 as i64 + b2 as i64 - 1) + lam as i64;
    Ok(lhs == rhs)
}

/// Rejection-sample a plane of dimension `d - r + 1` meeting every chord
/// at a single interior point: one random interior chord point per node,
/// padded with random vectors, retried until the incidences are clean.
pub fn sample_valid_plane<R: Rng>(
    cfg: &ChordConfig,
    r: usize,
    rng: &mut R,
) -> Result<Subspace> {
    let p = cfg.prime();
    let amb = cfg.ambient_dim();
    let d = cfg.d1 + cfg.d2;
    if r > d {
        return Err(Error::OutOfRange("need r <= d".into()));
    }
    let dim = d - r + 1;
    let n_nodes = cfg.curve.num_nodes();
    if dim < n_nodes {
        return Err(Error::OutOfRange(format!(
            "a {dim}-dimensional plane cannot meet {n_nodes} disjoint chords"
        )));
    }
    for _ in 0..200 {
        let mut rows = Vec::with_capacity(dim);
        for j in 0..n_nodes {
            let (q1, q2) = cfg.curve.node(j);
            let mu = Fp::random_nonzero(rng, p);
            let e1 = embed_point(cfg, 1, q1);
            let e2 = embed_point(cfg, 2, q2);
            rows.push(
                e1.iter()
                    .zip(&e2)
                    .map(|(&a, &b)| a + mu * b)
                    .collect::<Vec<Fp>>(),
            );
        }
        for _ in n_nodes..dim {
            rows.push((0..amb).map(|_| Fp::random(rng, p)).collect());
        }
        let plane = Subspace::from_rows(rows, amb, p);
        if plane.dim() != dim {
            continue;
        }
        if plane_to_series(cfg, &plane).is_ok() {
            return Ok(plane);
        }
    }
    Err(Error::InsufficientData(
        "could not sample a valid plane in 200 attempts".into(),
    ))
}

/// Summary of a batch of round-trip and dictionary checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub schema_version: u32,
    pub g: usize,
    pub dd: MultiDegree,
    pub r: usize,
    pub prime: u64,
    pub seed: u64,
    pub planes_tested: usize,
    pub roundtrip_failures: usize,
    pub membership_failures: usize,
    pub dict_checks: usize,
    pub dict_failures: usize,
}

/// Run `n_planes` plane round-trips and `n_dict` dictionary draws on a
/// fresh configuration; failures of any kind are counted, never hidden.
pub fn run_crosscheck<R: Rng>(
    cfg: &ChordConfig,
    r: usize,
    n_planes: usize,
    n_dict: usize,
    seed: u64,
    rng: &mut R,
) -> Result<CrosscheckReport> {
    let mut roundtrip_failures = 0;
    let mut membership_failures = 0;
    for _ in 0..n_planes {
        let plane = sample_valid_plane(cfg, r, rng)?;
        let ls = plane_to_series(cfg, &plane)?;
        // membership: the sections must sit inside the bundle's full
        // section space
        let full = section_space(cfg.curve(), &ls.sheaf)?;
        if !full.subspace().contains(&ls.v) || ls.v.dim() != r + 1 {
            membership_failures += 1;
        }
        // canonical representative: round-trip must be the exact identity
        let canon = series_to_plane(cfg, &ls)?;
        let ls2 = plane_to_series(cfg, &canon)?;
        if ls2.sheaf != ls.sheaf || ls2.v != ls.v {
            roundtrip_failures += 1;
        }
        if series_to_plane(cfg, &ls2)? != canon {
            roundtrip_failures += 1;
        }
    }
    let mut dict_failures = 0;
    for _ in 0..n_dict {
        let plane = sample_valid_plane(cfg, r, rng)?;
        let b1 = rng.gen_range(0..=cfg.d1);
        let b2 = rng.gen_range(0..=cfg.d2);
        let lam = rng.gen_range(0..=(cfg.ambient_dim() - plane.dim()).min(3));
        if !dictionary_check(cfg, &plane, b1, b2, lam)? {
            dict_failures += 1;
        }
    }
    Ok(CrosscheckReport {
        schema_version: 1,
        g: cfg.curve.genus(),
        dd: cfg.multidegree(),
        r,
        prime: cfg.prime(),
        seed,
        planes_tested: n_planes,
        roundtrip_failures,
        membership_failures,
        dict_checks: n_dict,
        dict_failures,
    })
}
