//! Global sections of rank-one sheaves on binary curves.
//!
//! A section of multidegree `(d_1, d_2)` is a pair of polynomials
//! `(f_1, f_2)` with `deg f_i <= d_i`, stored as the concatenated
//! coefficient vector in `F_p^{b_1 + b_2}` with `b_i = max(d_i + 1, 0)`.
//! At each glued node the pair must satisfy `f_1(q^1_j) = lambda_j f_2(q^2_j)`;
//! the section space is the kernel of the resulting gluing matrix.
//!
//! Vanishing conditions at the marked points use the binomial-coefficient
//! shift rows `C(k, m) t^{k-m}`, which remain correct in small positive
//! characteristic where iterated derivatives degenerate.

use std::collections::BTreeMap;

use crate::curvemodel::{BinaryCurve, MultiDegree, NodeSubset};
use crate::exactalg::{Fp, Mat, Subspace};
use crate::{Error, Result};

/// A divisor supported at the two marked points: `a_1 P_1 + a_2 P_2`.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, serde::Serialize, serde::Deserialize,
)]
pub struct DivisorStep {
    pub a1: u64,
    pub a2: u64,
}

impl DivisorStep {
    pub fn new(a1: u64, a2: u64) -> Self {
        DivisorStep { a1, a2 }
    }

    pub fn zero() -> Self {
        DivisorStep { a1: 0, a2: 0 }
    }

    pub fn deg(&self) -> u64 {
        self.a1 + self.a2
    }

    /// Componentwise comparison.
    pub fn le(&self, other: &DivisorStep) -> bool {
        self.a1 <= other.a1 && self.a2 <= other.a2
    }
}

impl std::fmt::Display for DivisorStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.a1, self.a2)
    }
}

/// Gluing data of a rank-one torsion-free sheaf: the set `J` of nodes where
/// the sheaf is not locally free, the multidegree on the partial
/// normalization, and one nonzero gluing scalar per remaining node.
/// Normalized so the smallest glued node carries `lambda = 1`; scaling the
/// whole vector gives an isomorphic sheaf.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SheafRep {
    j: NodeSubset,
    dd: MultiDegree,
    lambda: BTreeMap<usize, Fp>,
}

impl SheafRep {
    pub fn new(
        num_nodes: usize,
        j: NodeSubset,
        dd: MultiDegree,
        lambda: BTreeMap<usize, Fp>,
    ) -> Result<Self> {
        if j.len() >= num_nodes {
            return Err(Error::DisconnectingSubset);
        }
        if let Some(bad) = j.iter().find(|&idx| idx >= num_nodes) {
            return Err(Error::InvalidSheaf(format!("node index {bad} out of range")));
        }
        let glued: Vec<usize> = (0..num_nodes).filter(|i| !j.contains(*i)).collect();
        if lambda.len() != glued.len() || glued.iter().any(|i| !lambda.contains_key(i)) {
            return Err(Error::InvalidSheaf(
                "gluing scalars must be indexed exactly by the glued nodes".into(),
            ));
        }
        if lambda.values().any(|l| l.is_zero()) {
            return Err(Error::InvalidSheaf("gluing scalar is zero".into()));
        }
        let first = glued[0];
        if lambda[&first].val() != 1 {
            return Err(Error::InvalidSheaf(format!(
                "gluing scalar at node {first} must be 1"
            )));
        }
        Ok(SheafRep { j, dd, lambda })
    }

    /// A line bundle: `J` empty, one scalar per node.
    pub fn line_bundle(num_nodes: usize, dd: MultiDegree, lambda: Vec<Fp>) -> Result<Self> {
        let map = lambda.into_iter().enumerate().collect();
        SheafRep::new(num_nodes, NodeSubset::empty(), dd, map)
    }

    pub fn freed_nodes(&self) -> &NodeSubset {
        &self.j
    }

    pub fn multidegree(&self) -> MultiDegree {
        self.dd
    }

    pub fn lambda(&self, node: usize) -> Option<Fp> {
        self.lambda.get(&node).copied()
    }

    pub fn glued_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.lambda.keys().copied()
    }
}

/// Sizes of the two coefficient blocks for a multidegree.
pub fn block_sizes(dd: MultiDegree) -> (usize, usize) {
    ((dd.d1 + 1).max(0) as usize, (dd.d2 + 1).max(0) as usize)
}

/// The space of global sections, as a subspace of the coefficient space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SectionSpace {
    dd: MultiDegree,
    space: Subspace,
}

impl SectionSpace {
    pub fn multidegree(&self) -> MultiDegree {
        self.dd
    }

    pub fn subspace(&self) -> &Subspace {
        &self.space
    }

    pub fn h0(&self) -> usize {
        self.space.dim()
    }
}

fn eval_row(t: Fp, b: usize) -> Vec<Fp> {
    let mut row = Vec::with_capacity(b);
    let mut pw = Fp::one(t.modulus());
    for _ in 0..b {
        row.push(pw);
        pw = pw * t;
    }
    row
}

/// Kernel of the node-gluing matrix: rows `[q_1^k | -lambda q_2^k]` over the
/// glued nodes of `sheaf`, columns the coefficient blocks.
pub fn section_space(x: &BinaryCurve, sheaf: &SheafRep) -> Result<SectionSpace> {
    let p = x.prime();
    if sheaf.glued_nodes().any(|j| j >= x.num_nodes()) {
        return Err(Error::InvalidSheaf("gluing node out of range for curve".into()));
    }
    let dd = sheaf.multidegree();
    let (b1, b2) = block_sizes(dd);
    let mut rows = Vec::new();
    for j in sheaf.glued_nodes() {
        let (q1, q2) = x.node(j);
        let lam = sheaf.lambda(j).unwrap();
        let mut row = eval_row(q1, b1);
        row.extend(eval_row(q2, b2).into_iter().map(|v| -(lam * v)));
        rows.push(row);
    }
    let m = Mat::from_rows(rows, b1 + b2, p);
    Ok(SectionSpace {
        dd,
        space: m.kernel(),
    })
}

/// `h^0` of the sheaf on `x`.
pub fn h0(x: &BinaryCurve, sheaf: &SheafRep) -> Result<usize> {
    Ok(section_space(x, sheaf)?.h0())
}

/// Pascal-triangle binomials `C(k, m)` reduced mod `p`, for `k < b`.
fn binomial_column(m: u64, b: usize, p: u64) -> Vec<Fp> {
    // C(k, m) for k = 0..b-1 via the recurrence C(k, m) = C(k-1, m-1) + C(k-1, m)
    let mut prev: Vec<Fp> = vec![Fp::one(p)]; // row k = 0
    let mut out = Vec::with_capacity(b);
    for k in 0..b as u64 {
        if k > 0 {
            let mut next = vec![Fp::zero(p); k as usize + 1];
            next[0] = Fp::one(p);
            next[k as usize] = Fp::one(p);
            for i in 1..k as usize {
                next[i] = prev[i - 1] + prev[i];
            }
            prev = next;
        }
        out.push(if m <= k { prev[m as usize] } else { Fp::zero(p) });
    }
    out
}

/// Rows expressing "vanishes to order >= a at t" on a coefficient block of
/// size `b`: for each m < min(a, b), row `k -> C(k, m) t^{k-m}`.
fn vanishing_rows(t: Fp, a: u64, b: usize) -> Vec<Vec<Fp>> {
    let p = t.modulus();
    let mut rows = Vec::new();
    for m in 0..a.min(b as u64) {
        let binom = binomial_column(m, b, p);
        let mut row = vec![Fp::zero(p); b];
        for k in m..b as u64 {
            row[k as usize] = binom[k as usize] * t.pow(k - m);
        }
        rows.push(row);
    }
    rows
}

/// The subspace of `v` vanishing to order `>= d.a1` at `P_1` and `>= d.a2`
/// at `P_2`.
pub fn vanishing_subspace(
    x: &BinaryCurve,
    dd: MultiDegree,
    v: &Subspace,
    d: &DivisorStep,
) -> Result<Subspace> {
    let p = x.prime();
    let (b1, b2) = block_sizes(dd);
    if v.ambient_dim() != b1 + b2 {
        return Err(Error::AmbientMismatch {
            left: v.ambient_dim(),
            right: b1 + b2,
        });
    }
    let (p1, p2) = x.marked();
    let mut rows = Vec::new();
    for r in vanishing_rows(p1, d.a1, b1) {
        let mut row = r;
        row.extend(vec![Fp::zero(p); b2]);
        rows.push(row);
    }
    for r in vanishing_rows(p2, d.a2, b2) {
        let mut row = vec![Fp::zero(p); b1];
        row.extend(r);
        rows.push(row);
    }
    let cond = Mat::from_rows(rows, b1 + b2, p).kernel();
    v.intersect(&cond)
}

/// Dimensions `dim V(-D_l)` along a divisor sequence. Prepends the zero
/// divisor if absent; requires componentwise increase with strictly
/// increasing degree.
pub fn filtration_dims(
    x: &BinaryCurve,
    dd: MultiDegree,
    v: &Subspace,
    d_seq: &[DivisorStep],
) -> Result<Vec<usize>> {
    let mut seq: Vec<DivisorStep> = Vec::with_capacity(d_seq.len() + 1);
    if d_seq.first() != Some(&DivisorStep::zero()) {
        seq.push(DivisorStep::zero());
    }
    seq.extend_from_slice(d_seq);
    for w in seq.windows(2) {
        if !w[0].le(&w[1]) || w[0].deg() >= w[1].deg() {
            return Err(Error::NonMonotoneDivisors);
        }
    }
    seq.iter()
        .map(|d| Ok(vanishing_subspace(x, dd, v, d)?.dim()))
        .collect()
}

/// The multi-vanishing sequence of `v` along `d_seq` (zero divisor
/// prepended if absent): the value `deg D_l` occurs with multiplicity
/// `n_l - n_{l+1}`, and the terminal degree with multiplicity `n_L`.
/// The result is non-decreasing of length `dim v`.
pub fn multi_vanishing_sequence(
    x: &BinaryCurve,
    dd: MultiDegree,
    v: &Subspace,
    d_seq: &[DivisorStep],
) -> Result<Vec<u64>> {
    let mut seq: Vec<DivisorStep> = Vec::with_capacity(d_seq.len() + 1);
    if d_seq.first() != Some(&DivisorStep::zero()) {
        seq.push(DivisorStep::zero());
    }
    seq.extend_from_slice(d_seq);
    let dims = filtration_dims(x, dd, v, &seq)?;
    let mut out = Vec::with_capacity(dims[0]);
    for l in 0..seq.len() {
        let mult = if l + 1 < seq.len() {
            dims[l] - dims[l + 1]
        } else {
            dims[l]
        };
        for _ in 0..mult {
            out.push(seq[l].deg());
        }
    }
    Ok(out)
}

/// Whether `v` meets the ramification condition `(d_seq, a)`: for every
/// `j`, the subspace vanishing along the divisor of degree `a_j` has
/// dimension at least `r + 1 - j`.
pub fn meets_ramification(
    x: &BinaryCurve,
    dd: MultiDegree,
    v: &Subspace,
    d_seq: &[DivisorStep],
    a: &[u64],
) -> Result<bool> {
    let mut seq: Vec<DivisorStep> = Vec::with_capacity(d_seq.len() + 1);
    if d_seq.first() != Some(&DivisorStep::zero()) {
        seq.push(DivisorStep::zero());
    }
    seq.extend_from_slice(d_seq);
    let dims = filtration_dims(x, dd, v, &seq)?;
    let r = a.len() - 1;
    for (j, &aj) in a.iter().enumerate() {
        let l = seq
            .iter()
            .position(|d| d.deg() == aj)
            .ok_or_else(|| Error::Inadmissible(format!("no divisor of degree {aj} in the sequence")))?;
        if dims[l] < r + 1 - j {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A section space remembered together with its gluing data.
#[derive(Clone, Debug)]
pub struct LinearSeries {
    pub sheaf: SheafRep,
    pub v: Subspace,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvemodel::random_curve;

    fn trivial_lambda(n: usize, p: u64) -> Vec<Fp> {
        vec![Fp::one(p); n]
    }

    /// All gluing vectors with lambda_0 = 1 for a curve with `n` nodes.
    fn torus(n: usize, p: u64) -> Vec<Vec<Fp>> {
        let mut out = vec![vec![Fp::one(p)]];
        for _ in 1..n {
            let mut next = Vec::new();
            for v in &out {
                for l in 1..p {
                    let mut w = v.clone();
                    w.push(Fp::from_u64(l, p));
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn h0_genus_zero() {
        // one node: h^0 = d + 1 whenever both blocks are nonempty
        let x = random_curve(0, 11, 0).unwrap();
        for (d1, d2) in [(0, 0), (2, 0), (1, 3), (3, 1)] {
            let s = SheafRep::line_bundle(1, MultiDegree::new(d1, d2), trivial_lambda(1, 11)).unwrap();
            assert_eq!(h0(&x, &s).unwrap() as i64, d1 + d2 + 1);
        }
    }

    #[test]
    fn h0_with_empty_block() {
        // f_2 = 0 forces f_1 to vanish at every node preimage on Z_1
        let x = random_curve(2, 7, 1).unwrap();
        for lam in torus(3, 7) {
            let s = SheafRep::line_bundle(3, MultiDegree::new(3, -2), lam).unwrap();
            assert_eq!(h0(&x, &s).unwrap(), 1);
        }
    }

    #[test]
    fn h0_high_degree_formula() {
        // d_1 >= g: h^0 = d_1 - g + max(d_2 + 1, 0) for every gluing vector
        let x = random_curve(2, 5, 3).unwrap();
        for lam in torus(3, 5) {
            for (d1, d2) in [(3i64, 1i64), (2, 0), (2, -1), (4, -3), (3, 2)] {
                let s = SheafRep::line_bundle(3, MultiDegree::new(d1, d2), lam.clone()).unwrap();
                let expect = (d1 - 2 + (d2 + 1).max(0)) as usize;
                assert_eq!(h0(&x, &s).unwrap(), expect, "dd=({d1},{d2})");
            }
        }
    }

    #[test]
    fn h0_zero_multidegree() {
        // (0,0): constants glued by lambda; nonzero section iff all lambda equal
        let x = random_curve(1, 7, 2).unwrap();
        for lam in torus(2, 7) {
            let s = SheafRep::line_bundle(2, MultiDegree::new(0, 0), lam.clone()).unwrap();
            let expect = if lam[1].val() == 1 { 1 } else { 0 };
            assert_eq!(h0(&x, &s).unwrap(), expect);
        }
    }

    #[test]
    fn sections_glue_correctly() {
        let x = random_curve(2, 13, 4).unwrap();
        let lam = vec![Fp::one(13), Fp::new(5, 13), Fp::new(9, 13)];
        let s = SheafRep::line_bundle(3, MultiDegree::new(2, 2), lam.clone()).unwrap();
        let space = section_space(&x, &s).unwrap();
        for row in space.subspace().basis_rows() {
            let (f1, f2) = row.split_at(3);
            for (j, &l) in lam.iter().enumerate() {
                let (q1, q2) = x.node(j);
                let ev = |f: &[Fp], t: Fp| {
                    let mut acc = Fp::zero(13);
                    for (k, &c) in f.iter().enumerate() {
                        acc = acc + c * t.pow(k as u64);
                    }
                    acc
                };
                assert_eq!(ev(f1, q1), l * ev(f2, q2));
            }
        }
    }

    #[test]
    fn vanishing_dims_genus_zero() {
        let x = random_curve(0, 11, 0).unwrap();
        let dd = MultiDegree::new(2, 0);
        let s = SheafRep::line_bundle(1, dd, trivial_lambda(1, 11)).unwrap();
        let v = section_space(&x, &s).unwrap();
        assert_eq!(v.h0(), 3);
        let space = v.subspace().clone();
        let dim_at = |a1: u64, a2: u64| {
            vanishing_subspace(&x, dd, &space, &DivisorStep::new(a1, a2))
                .unwrap()
                .dim()
        };
        assert_eq!(dim_at(0, 0), 3);
        assert_eq!(dim_at(1, 0), 2);
        assert_eq!(dim_at(2, 0), 1);
        assert_eq!(dim_at(3, 0), 0);
        // order past the block size still just kills the block
        assert_eq!(dim_at(5, 0), 0);
    }

    #[test]
    fn multi_vanishing_example() {
        let x = random_curve(0, 11, 0).unwrap();
        let dd = MultiDegree::new(2, 0);
        let s = SheafRep::line_bundle(1, dd, trivial_lambda(1, 11)).unwrap();
        let v = section_space(&x, &s).unwrap().subspace().clone();
        let seq = vec![DivisorStep::new(1, 0), DivisorStep::new(2, 0)];
        let mv = multi_vanishing_sequence(&x, dd, &v, &seq).unwrap();
        assert_eq!(mv, vec![0, 1, 2]);
    }

    #[test]
    fn multi_vanishing_length_is_dim() {
        let x = random_curve(2, 13, 7).unwrap();
        let dd = MultiDegree::new(3, 2);
        for lam in [vec![1, 1, 1], vec![1, 3, 7], vec![1, 12, 2]] {
            let lam: Vec<Fp> = lam.into_iter().map(|l| Fp::new(l, 13)).collect();
            let s = SheafRep::line_bundle(3, dd, lam).unwrap();
            let v = section_space(&x, &s).unwrap().subspace().clone();
            let seq = vec![
                DivisorStep::new(1, 0),
                DivisorStep::new(1, 1),
                DivisorStep::new(2, 2),
            ];
            let mv = multi_vanishing_sequence(&x, dd, &v, &seq).unwrap();
            assert_eq!(mv.len(), v.dim());
            assert!(mv.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn filtration_monotone() {
        let x = random_curve(1, 11, 9).unwrap();
        let dd = MultiDegree::new(2, 1);
        let s = SheafRep::line_bundle(2, dd, vec![Fp::one(11), Fp::new(4, 11)]).unwrap();
        let v = section_space(&x, &s).unwrap().subspace().clone();
        let seq = vec![
            DivisorStep::new(0, 1),
            DivisorStep::new(1, 1),
            DivisorStep::new(2, 1),
            DivisorStep::new(2, 2),
        ];
        let dims = filtration_dims(&x, dd, &v, &seq).unwrap();
        assert!(dims.windows(2).all(|w| w[0] >= w[1]));
        // each step cuts dimension by at most the degree increment
        assert!(dims.windows(2).all(|w| w[0] - w[1] <= 1));
    }

    #[test]
    fn non_monotone_rejected() {
        let x = random_curve(0, 7, 0).unwrap();
        let dd = MultiDegree::new(2, 0);
        let s = SheafRep::line_bundle(1, dd, trivial_lambda(1, 7)).unwrap();
        let v = section_space(&x, &s).unwrap().subspace().clone();
        let seq = vec![DivisorStep::new(2, 0), DivisorStep::new(1, 1)];
        assert!(matches!(
            filtration_dims(&x, dd, &v, &seq),
            Err(Error::NonMonotoneDivisors)
        ));
    }

    #[test]
    fn meets_ramification_matches_multi_vanishing() {
        // (d_seq, a) with a drawn from the realized sequence is met;
        // asking for a strictly larger sequence pointwise must fail
        let x = random_curve(1, 11, 3).unwrap();
        let dd = MultiDegree::new(2, 2);
        let s = SheafRep::line_bundle(2, dd, vec![Fp::one(11), Fp::new(6, 11)]).unwrap();
        let v = section_space(&x, &s).unwrap().subspace().clone();
        let seq = vec![
            DivisorStep::new(1, 0),
            DivisorStep::new(1, 1),
            DivisorStep::new(2, 1),
            DivisorStep::new(2, 2),
        ];
        let mv = multi_vanishing_sequence(&x, dd, &v, &seq).unwrap();
        assert!(meets_ramification(&x, dd, &v, &seq, &mv).unwrap());
        // bump the last entry past what the space realizes
        let mut too_big = mv.clone();
        if let Some(last) = too_big.last_mut() {
            let bigger = seq
                .iter()
                .map(|d| d.deg())
                .find(|&deg| deg > *last);
            if let Some(b) = bigger {
                *last = b;
                assert!(!meets_ramification(&x, dd, &v, &seq, &too_big).unwrap());
            }
        }
    }

    #[test]
    fn torsion_free_extension() {
        // freeing a node drops one gluing row: h^0 can only grow, by at most 1
        let x = random_curve(2, 11, 8).unwrap();
        let dd = MultiDegree::new(2, 1);
        for lam in [vec![1i64, 2, 3], vec![1, 10, 4]] {
            let lam_fp: Vec<Fp> = lam.iter().map(|&l| Fp::new(l, 11)).collect();
            let full = SheafRep::line_bundle(3, dd, lam_fp.clone()).unwrap();
            let h_full = h0(&x, &full).unwrap();
            let j = NodeSubset::from_indices([1]);
            let map: BTreeMap<usize, Fp> =
                [(0, lam_fp[0]), (2, lam_fp[2])].into_iter().collect();
            let freed = SheafRep::new(3, j, dd, map).unwrap();
            let h_freed = h0(&x, &freed).unwrap();
            assert!(h_freed >= h_full);
            assert!(h_freed <= h_full + 1);
        }
    }

    #[test]
    fn sheaf_validation() {
        let p = 7;
        // zero scalar
        assert!(SheafRep::line_bundle(
            2,
            MultiDegree::new(1, 1),
            vec![Fp::one(p), Fp::zero(p)]
        )
        .is_err());
        // first scalar must be 1
        assert!(SheafRep::line_bundle(
            2,
            MultiDegree::new(1, 1),
            vec![Fp::new(2, p), Fp::one(p)]
        )
        .is_err());
        // wrong index set
        let map: BTreeMap<usize, Fp> = [(0, Fp::one(p))].into_iter().collect();
        assert!(SheafRep::new(2, NodeSubset::empty(), MultiDegree::new(1, 1), map).is_err());
        // freeing every node disconnects
        let empty: BTreeMap<usize, Fp> = BTreeMap::new();
        assert!(matches!(
            SheafRep::new(1, NodeSubset::from_indices([0]), MultiDegree::new(1, 1), empty),
            Err(Error::DisconnectingSubset)
        ));
    }

    #[test]
    fn binomial_rows_small_characteristic() {
        // over F_2 the order-2 condition at t=1 on x^3 block picks C(k,2):
        // (0, 0, 1, 3) = (0, 0, 1, 1) mod 2
        let col = binomial_column(2, 4, 2);
        let vals: Vec<u64> = col.iter().map(|c| c.val()).collect();
        assert_eq!(vals, vec![0, 0, 1, 1]);
    }
}
