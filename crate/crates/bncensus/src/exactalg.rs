//! Exact arithmetic over prime fields, dense matrices, and q-analog counts.
//!
//! All arithmetic is exact: residues modulo a runtime-chosen prime for the
//! linear algebra, big integers for point counts. Subspaces are stored as
//! reduced row-echelon bases, so subspace equality is plain structural
//! equality of the bases.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// An element of the prime field `F_p`. The modulus travels with the value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fp {
    v: u64,
    p: u64,
}

impl std::fmt::Debug for Fp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (mod {})", self.v, self.p)
    }
}

impl std::fmt::Display for Fp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Fp {
    /// Reduce an integer into `[0, p)`.
    pub fn new(v: i64, p: u64) -> Self {
        debug_assert!(p >= 2);
        let m = v.rem_euclid(p as i64) as u64;
        Fp { v: m, p }
    }

    pub fn from_u64(v: u64, p: u64) -> Self {
        Fp { v: v % p, p }
    }

    pub fn zero(p: u64) -> Self {
        Fp { v: 0, p }
    }

    pub fn one(p: u64) -> Self {
        Fp { v: 1 % p, p }
    }

    pub fn val(self) -> u64 {
        self.v
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.v == 0
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp::one(self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; zero has none.
    pub fn inv(self) -> Result<Self> {
        if self.v == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(self.p - 2))
    }

    /// Uniform element of `F_p`.
    pub fn random<R: rand::Rng>(rng: &mut R, p: u64) -> Self {
        Fp {
            v: rng.gen_range(0..p),
            p,
        }
    }

    /// Uniform element of `F_p^*`.
    pub fn random_nonzero<R: rand::Rng>(rng: &mut R, p: u64) -> Self {
        Fp {
            v: rng.gen_range(1..p),
            p,
        }
    }
}

impl std::ops::Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        assert_eq!(self.p, rhs.p, "prime mismatch");
        let mut s = self.v + rhs.v;
        if s >= self.p {
            s -= self.p;
        }
        Fp { v: s, p: self.p }
    }
}

impl std::ops::Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        assert_eq!(self.p, rhs.p, "prime mismatch");
        let s = if self.v >= rhs.v {
            self.v - rhs.v
        } else {
            self.v + self.p - rhs.v
        };
        Fp { v: s, p: self.p }
    }
}

impl std::ops::Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        assert_eq!(self.p, rhs.p, "prime mismatch");
        let prod = (self.v as u128 * rhs.v as u128) % self.p as u128;
        Fp {
            v: prod as u64,
            p: self.p,
        }
    }
}

impl std::ops::Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.v == 0 {
            self
        } else {
            Fp {
                v: self.p - self.v,
                p: self.p,
            }
        }
    }
}

/// Trial-division primality test, adequate for CLI-scale moduli.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// A dense matrix over `F_p`, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    p: u64,
    data: Vec<Fp>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} mod {}", self.rows, self.cols, self.p)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize, p: u64) -> Self {
        Mat {
            rows,
            cols,
            p,
            data: vec![Fp::zero(p); rows * cols],
        }
    }

    pub fn identity(n: usize, p: u64) -> Self {
        let mut m = Mat::zeros(n, n, p);
        for i in 0..n {
            m.set(i, i, Fp::one(p));
        }
        m
    }

    /// Build from explicit rows. `cols` must be given to disambiguate the
    /// zero-row case.
    pub fn from_rows(rows: Vec<Vec<Fp>>, cols: usize, p: u64) -> Self {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            data.extend(r);
        }
        Mat {
            rows: nrows,
            cols,
            p,
            data,
        }
    }

    /// Build from integer entries, reduced mod p.
    pub fn from_i64(rows: &[&[i64]], cols: usize, p: u64) -> Self {
        let converted = rows
            .iter()
            .map(|r| r.iter().map(|&v| Fp::new(v, p)).collect())
            .collect();
        Mat::from_rows(converted, cols, p)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn at(&self, i: usize, j: usize) -> Fp {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Fp) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fp] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows, self.p);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.at(i, j));
            }
        }
        t
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        assert_eq!(self.p, other.p);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Mat {
            rows: self.rows + other.rows,
            cols: self.cols,
            p: self.p,
            data,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row-echelon form and rank.
    pub fn rref(&self) -> (usize, Mat) {
        let mut m = self.clone();
        let mut pivot = 0usize;
        for col in 0..m.cols {
            if pivot == m.rows {
                break;
            }
            let found = (pivot..m.rows).find(|&r| !m.at(r, col).is_zero());
            let Some(r) = found else { continue };
            m.swap_rows(pivot, r);
            let inv = m.at(pivot, col).inv().expect("pivot nonzero");
            for j in col..m.cols {
                let v = m.at(pivot, j) * inv;
                m.set(pivot, j, v);
            }
            for r2 in 0..m.rows {
                if r2 == pivot || m.at(r2, col).is_zero() {
                    continue;
                }
                let f = m.at(r2, col);
                for j in col..m.cols {
                    let v = m.at(r2, j) - f * m.at(pivot, j);
                    m.set(r2, j, v);
                }
            }
            pivot += 1;
        }
        (pivot, m)
    }

    pub fn rank(&self) -> usize {
        self.rref().0
    }

    /// Right kernel `{x : m.x = 0}` as a subspace of `F_p^cols`.
    pub fn kernel(&self) -> Subspace {
        let (rank, red) = self.rref();
        let mut pivot_cols = Vec::with_capacity(rank);
        let mut row = 0usize;
        for col in 0..self.cols {
            if row < rank && !red.at(row, col).is_zero() {
                pivot_cols.push(col);
                row += 1;
            }
        }
        let free_cols: Vec<usize> = (0..self.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut basis = Vec::with_capacity(free_cols.len());
        for &f in &free_cols {
            let mut v = vec![Fp::zero(self.p); self.cols];
            v[f] = Fp::one(self.p);
            for (i, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -red.at(i, f);
            }
            basis.push(v);
        }
        Subspace::from_rows(basis, self.cols, self.p)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[Fp]) -> Vec<Fp> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Fp::zero(self.p);
                for (j, &xj) in x.iter().enumerate() {
                    acc = acc + self.at(i, j) * xj;
                }
                acc
            })
            .collect()
    }
}

/// A linear subspace of `F_p^n`, stored as a reduced row-echelon basis.
/// Two subspaces are equal iff their stored bases are identical.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    ambient: usize,
    p: u64,
    basis: Mat,
}

impl Subspace {
    /// Span of the given rows; the basis is canonicalized via rref.
    pub fn from_rows(rows: Vec<Vec<Fp>>, ambient: usize, p: u64) -> Self {
        let m = Mat::from_rows(rows, ambient, p);
        Subspace::from_mat(&m)
    }

    /// Row space of a matrix.
    pub fn from_mat(m: &Mat) -> Self {
        let (rank, red) = m.rref();
        let rows = (0..rank).map(|i| red.row(i).to_vec()).collect();
        Subspace {
            ambient: m.cols(),
            p: m.prime(),
            basis: Mat::from_rows(rows, m.cols(), m.prime()),
        }
    }

    pub fn zero(ambient: usize, p: u64) -> Self {
        Subspace {
            ambient,
            p,
            basis: Mat::zeros(0, ambient, p),
        }
    }

    pub fn full(ambient: usize, p: u64) -> Self {
        Subspace {
            ambient,
            p,
            basis: Mat::identity(ambient, p),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn basis_rows(&self) -> impl Iterator<Item = &[Fp]> {
        (0..self.basis.rows()).map(move |i| self.basis.row(i))
    }

    pub fn contains_vec(&self, v: &[Fp]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let mut v = v.to_vec();
        for i in 0..self.basis.rows() {
            let lead = (0..self.ambient).find(|&j| !self.basis.at(i, j).is_zero());
            if let Some(j) = lead {
                if !v[j].is_zero() {
                    let f = v[j];
                    for (c, e) in v.iter_mut().enumerate() {
                        *e = *e - f * self.basis.at(i, c);
                    }
                }
            }
        }
        v.iter().all(|e| e.is_zero())
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        other.basis_rows().all(|r| self.contains_vec(r))
    }

    /// Sum of subspaces.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        Ok(Subspace::from_mat(&self.basis.vstack(&other.basis)))
    }

    /// Intersection, via the left kernel of the stacked bases.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let k1 = self.dim();
        let stacked = self.basis.vstack(&other.basis);
        // z with sum_i z_i row_i = 0; the first k1 coordinates express an
        // element of self that also lies in other.
        let left_kernel = stacked.transpose().kernel();
        let mut rows = Vec::with_capacity(left_kernel.dim());
        for z in left_kernel.basis_rows() {
            let mut v = vec![Fp::zero(self.p); self.ambient];
            for (i, &zi) in z.iter().take(k1).enumerate() {
                if zi.is_zero() {
                    continue;
                }
                for (c, e) in v.iter_mut().enumerate() {
                    *e = *e + zi * self.basis.at(i, c);
                }
            }
            rows.push(v);
        }
        Ok(Subspace::from_rows(rows, self.ambient, self.p))
    }

    /// dim(self ∩ other) without materializing the intersection basis.
    pub fn intersection_dim(&self, other: &Subspace) -> Result<usize> {
        self.check_compatible(other)?;
        let sum_dim = self.basis.vstack(&other.basis).rank();
        Ok(self.dim() + other.dim() - sum_dim)
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        if self.p != other.p {
            return Err(Error::PrimeMismatch);
        }
        Ok(())
    }
}

/// The q-binomial coefficient `[n choose k]_q`, exactly.
pub fn gaussian_binomial(n: u64, k: u64, q: u64) -> Result<BigUint> {
    if k > n {
        return Err(Error::OutOfRange(format!(
            "gaussian_binomial: k={k} > n={n}"
        )));
    }
    if q < 2 {
        return Err(Error::OutOfRange(format!("gaussian_binomial: q={q} < 2")));
    }
    let q = BigUint::from(q);
    let mut acc = BigUint::one();
    for i in 1..=k {
        let num = q.pow((n - k + i) as u32) - BigUint::one();
        let den = q.pow(i as u32) - BigUint::one();
        let prod = acc * num;
        debug_assert!((&prod % &den).is_zero());
        acc = prod / den;
    }
    Ok(acc)
}

/// All k-dimensional subspaces of `F_p^n`, enumerated as rref bases.
/// Exponential; intended for small brute-force oracles only.
pub fn enumerate_subspaces(n: usize, k: usize, p: u64) -> Result<Vec<Subspace>> {
    if k > n {
        return Err(Error::OutOfRange(format!(
            "enumerate_subspaces: k={k} > n={n}"
        )));
    }
    if !is_prime(p) {
        return Err(Error::OutOfRange(format!(
            "enumerate_subspaces needs prime p, got {p}"
        )));
    }
    let mut out = Vec::new();
    let mut pivots = (0..k).collect::<Vec<usize>>();
    loop {
        // free entries: (i, j) with j > pivots[i] and j not a pivot column
        let mut free = Vec::new();
        for (i, &pc) in pivots.iter().enumerate() {
            for j in pc + 1..n {
                if !pivots.contains(&j) {
                    free.push((i, j));
                }
            }
        }
        let mut counter = vec![0u64; free.len()];
        loop {
            let mut m = Mat::zeros(k, n, p);
            for (i, &pc) in pivots.iter().enumerate() {
                m.set(i, pc, Fp::one(p));
            }
            for (idx, &(i, j)) in free.iter().enumerate() {
                m.set(i, j, Fp::from_u64(counter[idx], p));
            }
            out.push(Subspace {
                ambient: n,
                p,
                basis: m,
            });
            // odometer over free entries
            let mut pos = 0;
            loop {
                if pos == counter.len() {
                    break;
                }
                counter[pos] += 1;
                if counter[pos] < p {
                    break;
                }
                counter[pos] = 0;
                pos += 1;
            }
            if counter.iter().all(|&c| c == 0) {
                break;
            }
        }
        // next pivot combination (lexicographic)
        if k == 0 {
            break;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if pivots[i] < n - (k - i) {
                pivots[i] += 1;
                for j in i + 1..k {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rref_identity() {
        let m = Mat::identity(2, 7);
        let (rank, red) = m.rref();
        assert_eq!(rank, 2);
        assert_eq!(red, m);
    }

    #[test]
    fn rref_zero() {
        let m = Mat::zeros(3, 4, 7);
        let (rank, red) = m.rref();
        assert_eq!(rank, 0);
        assert_eq!(red, m);
    }

    #[test]
    fn rref_dependent_rows() {
        // [[1,2],[2,4]] over F_7 row-reduces to [[1,2],[0,0]]
        let m = Mat::from_i64(&[&[1, 2], &[2, 4]], 2, 7);
        let (rank, red) = m.rref();
        assert_eq!(rank, 1);
        assert_eq!(red, Mat::from_i64(&[&[1, 2], &[0, 0]], 2, 7));
    }

    #[test]
    fn kernel_identity_is_zero() {
        let k = Mat::identity(3, 5).kernel();
        assert_eq!(k.dim(), 0);
    }

    #[test]
    fn kernel_zero_is_full() {
        let k = Mat::zeros(2, 5, 5).kernel();
        assert_eq!(k.dim(), 5);
        assert_eq!(k, Subspace::full(5, 5));
    }

    #[test]
    fn kernel_single_equation() {
        let m = Mat::from_i64(&[&[1, 1, 0]], 3, 5);
        let k = m.kernel();
        assert_eq!(k.dim(), 2);
        for x in k.basis_rows() {
            assert!((x[0] + x[1]).is_zero());
            for y in m.mul_vec(x) {
                assert!(y.is_zero());
            }
        }
    }

    #[test]
    fn intersect_trivial_cases() {
        let a = Subspace::from_rows(
            vec![vec![Fp::new(1, 7), Fp::new(2, 7), Fp::new(0, 7)]],
            3,
            7,
        );
        assert_eq!(a.intersect(&a).unwrap(), a);
        let e1 = Subspace::from_rows(vec![vec![Fp::new(1, 7), Fp::new(0, 7)]], 2, 7);
        let e2 = Subspace::from_rows(vec![vec![Fp::new(0, 7), Fp::new(1, 7)]], 2, 7);
        assert_eq!(e1.intersect(&e2).unwrap().dim(), 0);
    }

    #[test]
    fn intersect_dimension_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_subspace(&mut rng, 5, 3, 7);
            let b = random_subspace(&mut rng, 5, 3, 7);
            let inter = a.intersect(&b).unwrap();
            let stacked_rank = a.basis().vstack(b.basis()).rank();
            assert_eq!(inter.dim(), 3 + 3 - stacked_rank);
            assert_eq!(inter.dim(), a.intersection_dim(&b).unwrap());
            assert!(a.contains(&inter));
            assert!(b.contains(&inter));
        }
    }

    #[test]
    fn intersect_ambient_mismatch() {
        let a = Subspace::full(3, 7);
        let b = Subspace::full(4, 7);
        assert!(a.intersect(&b).is_err());
    }

    #[test]
    fn gaussian_binomial_small() {
        assert_eq!(gaussian_binomial(4, 0, 3).unwrap(), BigUint::from(1u32));
        assert_eq!(gaussian_binomial(2, 1, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(gaussian_binomial(4, 2, 2).unwrap(), BigUint::from(35u32));
        assert!(gaussian_binomial(2, 3, 2).is_err());
        assert!(gaussian_binomial(2, 1, 1).is_err());
    }

    #[test]
    fn gaussian_binomial_matches_enumeration() {
        for q in [2u64, 3] {
            for n in 0..=4usize {
                for k in 0..=n {
                    let count = enumerate_subspaces(n, k, q).unwrap().len();
                    let expected = gaussian_binomial(n as u64, k as u64, q)
                        .unwrap()
                        .to_usize()
                        .unwrap();
                    assert_eq!(count, expected, "n={n} k={k} q={q}");
                }
            }
        }
    }

    #[test]
    fn enumerated_subspaces_are_distinct() {
        let subs = enumerate_subspaces(4, 2, 3).unwrap();
        for i in 0..subs.len() {
            for j in i + 1..subs.len() {
                assert_ne!(subs[i], subs[j]);
            }
        }
    }

    #[test]
    fn fp_inverse_and_division_by_zero() {
        for v in 1..11u64 {
            let x = Fp::from_u64(v, 11);
            assert_eq!(x * x.inv().unwrap(), Fp::one(11));
        }
        assert!(Fp::zero(11).inv().is_err());
    }

    pub(crate) fn random_subspace<R: rand::Rng>(
        rng: &mut R,
        ambient: usize,
        dim: usize,
        p: u64,
    ) -> Subspace {
        loop {
            let rows = (0..dim)
                .map(|_| (0..ambient).map(|_| Fp::random(rng, p)).collect())
                .collect();
            let s = Subspace::from_rows(rows, ambient, p);
            if s.dim() == dim {
                return s;
            }
        }
    }

    prop_compose! {
        fn arb_mat()(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) -> Mat {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = (0..rows)
                .map(|_| (0..cols).map(|_| Fp::random(&mut rng, 7)).collect())
                .collect();
            Mat::from_rows(data, cols, 7)
        }
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(m in arb_mat()) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn rank_nullity(m in arb_mat()) {
            prop_assert_eq!(m.kernel().dim() + m.rank(), m.cols());
        }

        #[test]
        fn rref_idempotent(m in arb_mat()) {
            let (rank, red) = m.rref();
            let (rank2, red2) = red.rref();
            prop_assert_eq!(rank, rank2);
            prop_assert_eq!(red, red2);
        }

        #[test]
        fn subspace_invariant_under_row_ops(m in arb_mat(), scale in 1i64..7) {
            let a = Subspace::from_mat(&m);
            // appending a multiple of a row, and adding a multiple of the
            // first row to the last, both preserve the span
            let mut rows: Vec<Vec<Fp>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
            let first = rows[0].clone();
            rows.push(first.iter().map(|&v| Fp::new(scale, 7) * v).collect());
            let n = rows.len();
            for j in 0..m.cols() {
                rows[n - 2][j] = rows[n - 2][j] + Fp::new(scale, 7) * first[j];
            }
            let b = Subspace::from_rows(rows, m.cols(), 7);
            prop_assert_eq!(a, b);
        }
    }
}
