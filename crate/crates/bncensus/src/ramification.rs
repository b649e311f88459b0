//! Admissible ramification sequences, their normalization to strictly
//! increasing form, the expected-dimension formula, and degree bounds for
//! nonempty loci.

use crate::curvemodel::MultiDegree;
use crate::sections::DivisorStep;
use crate::{Error, Result};

fn with_zero_prefix(d_seq: &[DivisorStep]) -> Result<Vec<DivisorStep>> {
    let mut seq = Vec::with_capacity(d_seq.len() + 1);
    if d_seq.first() != Some(&DivisorStep::zero()) {
        seq.push(DivisorStep::zero());
    }
    seq.extend_from_slice(d_seq);
    for w in seq.windows(2) {
        if !w[0].le(&w[1]) || w[0].deg() >= w[1].deg() {
            return Err(Error::NonMonotoneDivisors);
        }
    }
    Ok(seq)
}

/// A nondecreasing sequence `a` is admissible along `D_seq` when every
/// `a_j` equals the degree of some divisor `D_l` and the number of
/// repetitions of `a_j` is at most `deg(D_{l+1} - D_l)`; repetitions of
/// the degree of the final divisor are unbounded, since the sequence can
/// always be extended.
pub fn is_admissible(a: &[u64], d_seq: &[DivisorStep]) -> Result<bool> {
    let seq = with_zero_prefix(d_seq)?;
    if a.windows(2).any(|w| w[0] > w[1]) {
        return Ok(false);
    }
    for &aj in a {
        let Some(l) = seq.iter().position(|d| d.deg() == aj) else {
            return Ok(false);
        };
        if l + 1 < seq.len() {
            let reps = a.iter().filter(|&&x| x == aj).count() as u64;
            if reps > seq[l + 1].deg() - seq[l].deg() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Boundedness of an admissible sequence by a multidegree: the final
/// divisor `D_{l_r}` lies below `(d_1+1)P_1 + (d_2+1)P_2` componentwise,
/// and the repetitions of its degree number at most `d_1+d_2+3 - deg D_{l_r}`.
pub fn is_d_bounded(a: &[u64], d_seq: &[DivisorStep], dd: MultiDegree) -> Result<bool> {
    if !is_admissible(a, d_seq)? {
        return Err(Error::Inadmissible("sequence not admissible".into()));
    }
    let seq = with_zero_prefix(d_seq)?;
    let Some(&ar) = a.last() else {
        return Ok(true);
    };
    let last = seq.iter().find(|d| d.deg() == ar).unwrap();
    if (last.a1 as i64) > dd.d1 + 1 || (last.a2 as i64) > dd.d2 + 1 {
        return Ok(false);
    }
    let reps = a.iter().filter(|&&x| x == ar).count() as i64;
    Ok(reps <= dd.d1 + dd.d2 + 3 - ar as i64)
}

/// Reduce `(D_seq, a)` to an equivalent pair with strictly increasing
/// degrees and `deg D''_j = a'_j` for all `j`. Repetitions of a value are
/// replaced by divisors of consecutive degrees inserted after the matching
/// divisor, adding points at `P_1` first, then `P_2`, without overshooting
/// the next divisor (or `(d_1+1, d_2+1)` when extending past the end with
/// a cap).
pub fn normalize_sequence(
    d_seq: &[DivisorStep],
    a: &[u64],
    cap: Option<MultiDegree>,
) -> Result<(Vec<DivisorStep>, Vec<u64>)> {
    if !is_admissible(a, d_seq)? {
        return Err(Error::Inadmissible("sequence not admissible".into()));
    }
    let seq = with_zero_prefix(d_seq)?;
    let cap_step = cap.map(|dd| DivisorStep::new((dd.d1 + 1).max(0) as u64, (dd.d2 + 1).max(0) as u64));
    let mut out_d: Vec<DivisorStep> = Vec::with_capacity(a.len());
    let mut out_a: Vec<u64> = Vec::with_capacity(a.len());
    for (j, &aj) in a.iter().enumerate() {
        if j == 0 || aj > a[j - 1] {
            let l = seq.iter().position(|d| d.deg() == aj).unwrap();
            out_d.push(seq[l]);
            out_a.push(aj);
        } else {
            // repetition: one more point past the previous output divisor
            let prev = *out_d.last().unwrap();
            let l = seq.iter().position(|d| d.deg() == aj).unwrap();
            let bound = if l + 1 < seq.len() {
                Some(seq[l + 1])
            } else {
                cap_step
            };
            let can_p1 = bound.is_none_or(|b| prev.a1 < b.a1);
            let can_p2 = bound.is_none_or(|b| prev.a2 < b.a2);
            let next = if can_p1 {
                DivisorStep::new(prev.a1 + 1, prev.a2)
            } else if can_p2 {
                DivisorStep::new(prev.a1, prev.a2 + 1)
            } else {
                return Err(Error::Inadmissible(
                    "no room to insert a divisor within the bound".into(),
                ));
            };
            out_d.push(next);
            out_a.push(next.deg());
        }
    }
    Ok((out_d, out_a))
}

/// The expected dimension
/// `rho = g - (r+1)(g-d+r) - (sum_j (a_j - j) + sum_l C(r_l, 2))`,
/// where `r_l` counts repetitions of each value in `a`. An empty `a`
/// means no ramification. The result may be negative.
pub fn expected_dim(g: i64, r: i64, d: i64, a: &[u64]) -> Result<i64> {
    if !a.is_empty() && a.len() as i64 != r + 1 {
        return Err(Error::OutOfRange(format!(
            "ramification sequence has {} entries, expected r+1 = {}",
            a.len(),
            r + 1
        )));
    }
    let base = g - (r + 1) * (g - d + r);
    if a.is_empty() {
        return Ok(base);
    }
    let mut correction = 0i64;
    for (j, &aj) in a.iter().enumerate() {
        correction += aj as i64 - j as i64;
    }
    let mut i = 0;
    while i < a.len() {
        let mut k = i;
        while k < a.len() && a[k] == a[i] {
            k += 1;
        }
        let reps = (k - i) as i64;
        correction += reps * (reps - 1) / 2;
        i = k;
    }
    Ok(base - correction)
}

/// What degree bounds force on a nonempty locus of multidegree `dd`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DegreeBoundVerdict {
    /// `d < g + r`: a nonempty locus forces `lo <= d_i <= hi` on both
    /// components; `violated` records whether `dd` breaks the bound,
    /// in which case the locus must be empty.
    MustBeEmptyOr { lo: i64, hi: i64, violated: bool },
    /// `d >= g + r`: no constraint from this bound.
    NoConstraint,
}

/// Degree bound check: requires one of the hypotheses `dd` balanced,
/// both `d_i >= -1`, or both `d_i <= g + r`.
pub fn degree_bounds(g: i64, r: i64, dd: MultiDegree) -> Result<DegreeBoundVerdict> {
    let d = dd.total();
    if d >= g + r {
        return Ok(DegreeBoundVerdict::NoConstraint);
    }
    let balanced = (dd.d1 - dd.d2).abs() <= g + 1;
    let lower = dd.d1 >= -1 && dd.d2 >= -1;
    let upper = dd.d1 <= g + r && dd.d2 <= g + r;
    if !(balanced || lower || upper) {
        return Err(Error::HypothesesViolated(
            "need dd balanced, or both d_i >= -1, or both d_i <= g+r".into(),
        ));
    }
    let lo = r;
    let hi = d - r;
    let violated = dd.d1 < lo || dd.d1 > hi || dd.d2 < lo || dd.d2 > hi;
    Ok(DegreeBoundVerdict::MustBeEmptyOr { lo, hi, violated })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steps(degrees: &[(u64, u64)]) -> Vec<DivisorStep> {
        degrees.iter().map(|&(a1, a2)| DivisorStep::new(a1, a2)).collect()
    }

    #[test]
    fn admissible_examples() {
        let d = steps(&[(1, 0), (2, 0), (3, 0)]); // degrees 0,1,2,3 after prefix
        assert!(is_admissible(&[0, 1, 2], &d).unwrap());
        let d13 = steps(&[(1, 0), (2, 1)]); // degrees 0,1,3
        assert!(is_admissible(&[0, 1, 1], &d13).unwrap());
        assert!(!is_admissible(&[0, 1, 1, 1], &d13).unwrap());
        // value not realized by any divisor
        assert!(!is_admissible(&[0, 2], &d13).unwrap());
        // decreasing
        assert!(!is_admissible(&[1, 0], &d13).unwrap());
        // terminal value repeats without bound
        assert!(is_admissible(&[3, 3, 3, 3, 3], &d13).unwrap());
        // empty sequence
        assert!(is_admissible(&[], &d13).unwrap());
    }

    #[test]
    fn d_bounded_examples() {
        let zero: Vec<DivisorStep> = vec![];
        assert!(is_d_bounded(&[0], &zero, MultiDegree::new(2, 1)).unwrap());
        // final divisor overshoots the first block
        let d = steps(&[(4, 0)]);
        assert!(!is_d_bounded(&[4], &d, MultiDegree::new(2, 5)).unwrap());
        // boundary case of the repetition bound: dd=(1,1), final (2,2) of
        // degree 4, one repetition, 1 <= 1+1+3-4 = 1
        let d = steps(&[(2, 2)]);
        assert!(is_d_bounded(&[4], &d, MultiDegree::new(1, 1)).unwrap());
        assert!(!is_d_bounded(&[4, 4], &d, MultiDegree::new(1, 1)).unwrap());
    }

    #[test]
    fn d_bounded_rejects_inadmissible() {
        let d = steps(&[(1, 0)]);
        assert!(matches!(
            is_d_bounded(&[2], &d, MultiDegree::new(1, 1)),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn normalize_identity_when_strict() {
        let d = steps(&[(1, 0), (2, 0), (2, 1)]);
        let (dn, an) = normalize_sequence(&d, &[0, 1, 3], None).unwrap();
        assert_eq!(dn, steps(&[(0, 0), (1, 0), (2, 1)]));
        assert_eq!(an, vec![0, 1, 3]);
    }

    #[test]
    fn normalize_inserts_consecutive_degrees() {
        // a=(0,1,1) along degrees (0,1,3): one inserted divisor of degree 2
        let d = steps(&[(1, 0), (2, 1)]);
        let (dn, an) = normalize_sequence(&d, &[0, 1, 1], None).unwrap();
        assert_eq!(an, vec![0, 1, 2]);
        assert_eq!(dn.len(), 3);
        assert_eq!(dn[2].deg(), 2);
        // stays below the next divisor componentwise
        assert!(dn[2].le(&DivisorStep::new(2, 1)));
        // P_1 gets the point first
        assert_eq!(dn[2], DivisorStep::new(2, 0));
    }

    #[test]
    fn normalize_terminal_extension_respects_cap() {
        // terminal repetitions extend past the last divisor; cap (d1+1, d2+1)
        let d = steps(&[(2, 0)]);
        let dd = MultiDegree::new(1, 2);
        let (dn, an) = normalize_sequence(&d, &[2, 2, 2], Some(dd)).unwrap();
        assert_eq!(an, vec![2, 3, 4]);
        let cap = DivisorStep::new(2, 3);
        for step in &dn {
            assert!(step.le(&cap));
        }
        assert_eq!(dn, steps(&[(2, 0), (2, 1), (2, 2)]));
    }

    #[test]
    fn normalize_output_shape() {
        let d = steps(&[(1, 1), (3, 1)]);
        let (dn, an) = normalize_sequence(&d, &[0, 2, 2, 4], Some(MultiDegree::new(3, 2))).unwrap();
        assert_eq!(dn.len(), 4);
        assert_eq!(an.len(), 4);
        for j in 0..4 {
            assert_eq!(dn[j].deg(), an[j]);
        }
        assert!(an.windows(2).all(|w| w[0] < w[1]));
        assert!(dn.windows(2).all(|w| w[0].le(&w[1])));
    }

    #[test]
    fn expected_dim_examples() {
        assert_eq!(expected_dim(2, 0, 1, &[]).unwrap(), 1);
        assert_eq!(expected_dim(0, 1, 4, &[0, 2]).unwrap(), 5);
        assert_eq!(expected_dim(0, 2, 4, &[0, 1, 1]).unwrap(), 6);
        assert_eq!(expected_dim(2, 0, 2, &[3]).unwrap(), -1);
    }

    #[test]
    fn expected_dim_minimal_ramification_is_rho() {
        for g in 0..4 {
            for r in 0..3 {
                for d in 0..6 {
                    let a: Vec<u64> = (0..=r as u64).collect();
                    assert_eq!(
                        expected_dim(g, r, d, &a).unwrap(),
                        expected_dim(g, r, d, &[]).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn expected_dim_monotone_in_a() {
        let base = expected_dim(1, 1, 3, &[0, 2]).unwrap();
        assert!(expected_dim(1, 1, 3, &[0, 3]).unwrap() < base);
        assert!(expected_dim(1, 1, 3, &[1, 2]).unwrap() < base);
    }

    #[test]
    fn expected_dim_length_check() {
        assert!(expected_dim(1, 1, 3, &[0]).is_err());
    }

    #[test]
    fn degree_bounds_examples() {
        // g=4, r=1, dd=(3,0): d=3 < 5, d_2 = 0 < r = 1
        match degree_bounds(4, 1, MultiDegree::new(3, 0)).unwrap() {
            DegreeBoundVerdict::MustBeEmptyOr { lo, hi, violated } => {
                assert_eq!((lo, hi), (1, 2));
                assert!(violated);
            }
            _ => panic!("expected a bound"),
        }
        match degree_bounds(4, 1, MultiDegree::new(2, 1)).unwrap() {
            DegreeBoundVerdict::MustBeEmptyOr { violated, .. } => assert!(!violated),
            _ => panic!("expected a bound"),
        }
        assert_eq!(
            degree_bounds(2, 0, MultiDegree::new(3, 1)).unwrap(),
            DegreeBoundVerdict::NoConstraint
        );
    }

    #[test]
    fn degree_bounds_hypotheses() {
        // d1 = 9, d2 = -9: not balanced, d2 < -1, d1 > g+r
        assert!(matches!(
            degree_bounds(4, 1, MultiDegree::new(9, -9)),
            Err(Error::HypothesesViolated(_))
        ));
    }
}
