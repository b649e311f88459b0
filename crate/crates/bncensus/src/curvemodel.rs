//! Binary curves and their discrete data: node pairs, marked points,
//! partial normalizations, multidegrees, polarizations, and stability.
//!
//! A binary curve of genus `g` is two projective lines `Z_1`, `Z_2` glued
//! along `g+1` pairs of distinct points. Points are stored affine-only;
//! the random generator never places a point at infinity.

use std::collections::BTreeSet;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exactalg::{is_prime, Fp};
use crate::{Error, Result};

/// A multidegree `(d_1, d_2)` over the two components.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, Serialize, Deserialize)]
pub struct MultiDegree {
    pub d1: i64,
    pub d2: i64,
}

impl MultiDegree {
    pub fn new(d1: i64, d2: i64) -> Self {
        MultiDegree { d1, d2 }
    }

    /// Total degree `d = d_1 + d_2`.
    pub fn total(&self) -> i64 {
        self.d1 + self.d2
    }

    /// `|d_1 - d_2| <= g + 1`.
    pub fn is_balanced(&self, g: usize) -> bool {
        (self.d1 - self.d2).abs() <= g as i64 + 1
    }
}

impl std::fmt::Display for MultiDegree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.d1, self.d2)
    }
}

/// Degrees `(e_1, e_2)` of a polarization restricted to the two components.
/// Kept as exact rationals so strict/non-strict threshold tests are exact.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Polarization {
    pub e1: Rational64,
    pub e2: Rational64,
}

impl Polarization {
    pub fn new(e1: Rational64, e2: Rational64) -> Self {
        Polarization { e1, e2 }
    }

    pub fn total(&self) -> Rational64 {
        self.e1 + self.e2
    }
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.e1, self.e2)
    }
}

/// The standard polarization `E_{d,g,y}`:
/// `((d-g+y)/2, (d-g-y)/2 + 1)` when `d-g-y` is even,
/// `((d-g+y+1)/2, (d-g-y+1)/2)` otherwise.
pub fn make_polarization(d: i64, g: i64, y: i64) -> Polarization {
    if (d - g - y).rem_euclid(2) == 0 {
        Polarization::new(
            Rational64::new(d - g + y, 2),
            Rational64::new(d - g - y, 2) + Rational64::from_integer(1),
        )
    } else {
        Polarization::new(
            Rational64::new(d - g + y + 1, 2),
            Rational64::new(d - g - y + 1, 2),
        )
    }
}

/// `|d_1 - d_2| <= g + 1`.
pub fn is_balanced(dd: MultiDegree, g: usize) -> bool {
    dd.is_balanced(g)
}

/// Which component carries the quasistability base point.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Component {
    Z1,
    Z2,
}

impl Component {
    pub fn index(&self) -> usize {
        match self {
            Component::Z1 => 1,
            Component::Z2 => 2,
        }
    }
}

/// Stability class of a multidegree against a polarization,
/// strongest applicable first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum StabilityClass {
    Stable,
    QuasistableAtP,
    Semistable,
    Unstable,
}

/// Classify `dd` against `E`. Euler characteristics on the components are
/// `chi_i = d_i + 1`; stable means strict on both, quasistable strict on the
/// component holding `P`, semistable non-strict on both.
pub fn degree_stability(dd: MultiDegree, e: &Polarization, p_component: Component) -> StabilityClass {
    let chi1 = Rational64::from_integer(dd.d1 + 1);
    let chi2 = Rational64::from_integer(dd.d2 + 1);
    let strict1 = chi1 > e.e1;
    let strict2 = chi2 > e.e2;
    let weak1 = chi1 >= e.e1;
    let weak2 = chi2 >= e.e2;
    if strict1 && strict2 {
        StabilityClass::Stable
    } else if weak1 && weak2 {
        let strict_at_p = match p_component {
            Component::Z1 => strict1,
            Component::Z2 => strict2,
        };
        if strict_at_p {
            StabilityClass::QuasistableAtP
        } else {
            StabilityClass::Semistable
        }
    } else {
        StabilityClass::Unstable
    }
}

/// True iff `dd` is quasistable at `P`, i.e. classifies as Stable or
/// QuasistableAtP.
pub fn is_quasistable(dd: MultiDegree, e: &Polarization, p_component: Component) -> bool {
    matches!(
        degree_stability(dd, e, p_component),
        StabilityClass::Stable | StabilityClass::QuasistableAtP
    )
}

/// A subset of node indices at which a sheaf fails to be locally free.
/// Must stay a proper subset of the node set so that the corresponding
/// partial normalization is connected.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct NodeSubset(BTreeSet<usize>);

impl NodeSubset {
    pub fn empty() -> Self {
        NodeSubset(BTreeSet::new())
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        NodeSubset(iter.into_iter().collect())
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.0.contains(&idx)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl std::fmt::Display for NodeSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let items: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// A binary curve over `F_p`: `g+1` node pairs and one marked point on each
/// component, all coordinates affine and distinct per component.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinaryCurve {
    genus: usize,
    p: u64,
    nodes: Vec<(Fp, Fp)>,
    marked: (Fp, Fp),
    seed: Option<u64>,
}

/// Versioned serialization of a curve; reproducibility record for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveDoc {
    pub version: u32,
    pub genus: usize,
    pub prime: u64,
    pub seed: Option<u64>,
    pub nodes: Vec<[u64; 2]>,
    pub marked: [u64; 2],
}

impl BinaryCurve {
    pub fn new(
        genus: usize,
        p: u64,
        nodes: Vec<(Fp, Fp)>,
        marked: (Fp, Fp),
        seed: Option<u64>,
    ) -> Result<Self> {
        if nodes.len() != genus + 1 {
            return Err(Error::InvalidCurve(format!(
                "genus {} needs {} node pairs, got {}",
                genus,
                genus + 1,
                nodes.len()
            )));
        }
        for comp in 0..2 {
            let coords: Vec<Fp> = nodes
                .iter()
                .map(|n| if comp == 0 { n.0 } else { n.1 })
                .collect();
            for i in 0..coords.len() {
                for j in i + 1..coords.len() {
                    if coords[i] == coords[j] {
                        return Err(Error::InvalidCurve(format!(
                            "node coordinates on Z_{} collide",
                            comp + 1
                        )));
                    }
                }
            }
            let mark = if comp == 0 { marked.0 } else { marked.1 };
            if coords.contains(&mark) {
                return Err(Error::InvalidCurve(format!(
                    "marked point on Z_{} coincides with a node",
                    comp + 1
                )));
            }
        }
        Ok(BinaryCurve {
            genus,
            p,
            nodes,
            marked,
            seed,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[(Fp, Fp)] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> (Fp, Fp) {
        self.nodes[j]
    }

    pub fn marked(&self) -> (Fp, Fp) {
        self.marked
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn to_doc(&self) -> CurveDoc {
        CurveDoc {
            version: 1,
            genus: self.genus,
            prime: self.p,
            seed: self.seed,
            nodes: self.nodes.iter().map(|n| [n.0.val(), n.1.val()]).collect(),
            marked: [self.marked.0.val(), self.marked.1.val()],
        }
    }

    pub fn from_doc(doc: &CurveDoc) -> Result<Self> {
        if doc.version != 1 {
            return Err(Error::InvalidCurve(format!(
                "unsupported curve document version {}",
                doc.version
            )));
        }
        let p = doc.prime;
        let nodes = doc
            .nodes
            .iter()
            .map(|n| (Fp::from_u64(n[0], p), Fp::from_u64(n[1], p)))
            .collect();
        let marked = (Fp::from_u64(doc.marked[0], p), Fp::from_u64(doc.marked[1], p));
        BinaryCurve::new(doc.genus, p, nodes, marked, doc.seed)
    }
}

/// Deterministic random curve: distinct affine coordinates per component.
/// Requires `p > g + 2` so each component has room for `g+1` node
/// coordinates plus the marked point.
pub fn random_curve(g: usize, p: u64, seed: u64) -> Result<BinaryCurve> {
    if !is_prime(p) {
        return Err(Error::OutOfRange(format!("{p} is not prime")));
    }
    if p <= g as u64 + 2 {
        return Err(Error::PrimeTooSmall { p, g });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_component = |rng: &mut ChaCha8Rng| {
        let mut used = BTreeSet::new();
        let mut coords = Vec::with_capacity(g + 2);
        while coords.len() < g + 2 {
            let v = rng.gen_range(0..p);
            if used.insert(v) {
                coords.push(Fp::from_u64(v, p));
            }
        }
        coords
    };
    let c1 = draw_component(&mut rng);
    let c2 = draw_component(&mut rng);
    let nodes = (0..=g).map(|j| (c1[j], c2[j])).collect();
    let marked = (c1[g + 1], c2[g + 1]);
    BinaryCurve::new(g, p, nodes, marked, Some(seed))
}

/// Normalize the curve at the nodes in `J`: those node pairs are separated
/// and drop out of the gluing data; the genus decreases by `|J|`.
pub fn partial_normalization(x: &BinaryCurve, j: &NodeSubset) -> Result<BinaryCurve> {
    if j.len() >= x.num_nodes() {
        return Err(Error::DisconnectingSubset);
    }
    if let Some(bad) = j.iter().find(|&idx| idx >= x.num_nodes()) {
        return Err(Error::InvalidCurve(format!("node index {bad} out of range")));
    }
    let nodes = x
        .nodes
        .iter()
        .enumerate()
        .filter(|(idx, _)| !j.contains(*idx))
        .map(|(_, n)| *n)
        .collect();
    BinaryCurve::new(x.genus - j.len(), x.p, nodes, x.marked, x.seed)
}

/// All strata `(J, dd_J)` of the compactified locus for total degree `d`:
/// `J` a proper subset of the `g+1` nodes, `d^1_J + d^2_J = d - |J|`, and
/// `dd_J` quasistable at `P` with respect to `E`. Ordered by `|J|`, then
/// lexicographically by `J`, then by `d^1_J`.
pub fn quasistable_strata(
    d: i64,
    g: usize,
    e: &Polarization,
    p_component: Component,
) -> Vec<(NodeSubset, MultiDegree)> {
    let n_nodes = g + 1;
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for mask in 0u64..(1u64 << n_nodes) {
        if mask.count_ones() as usize == n_nodes {
            continue; // must stay connected
        }
        let idx: Vec<usize> = (0..n_nodes).filter(|&b| mask >> b & 1 == 1).collect();
        subsets.push(idx);
    }
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut out = Vec::new();
    for idx in subsets {
        let j = NodeSubset::from_indices(idx.iter().copied());
        let d_total = d - j.len() as i64;
        // semistability brackets d1: d1 >= e1 - 1 and d2 >= e2 - 1
        let lo = (e.e1 - Rational64::from_integer(1)).ceil().to_integer();
        let hi = (Rational64::from_integer(d_total) - e.e2 + Rational64::from_integer(1))
            .floor()
            .to_integer();
        for d1 in lo..=hi {
            let dd = MultiDegree::new(d1, d_total - d1);
            if is_quasistable(dd, e, p_component) {
                out.push((j.clone(), dd));
            }
        }
    }
    out
}
