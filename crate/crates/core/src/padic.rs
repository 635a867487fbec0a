//! Newton polygons, the slope invariant `l_q`, and the minimum-valuation
//! identity `min_eps v_q(P(eps/q)) = v_q(a) - k - l_q(P)` together with a
//! root-of-unity evaluation oracle.
//!
//! Slopes are exact rationals in v_q units (v_q(q) = 1 with q = p^d); no
//! floating point anywhere.

use crate::ff::{self, FieldTable, PadicRing, PadicScalar};
use crate::{Error, Result};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::Zero;
use std::sync::Arc;

/// Exact rational used for slopes and valuations.
pub type Rat = Ratio<i64>;

/// A polynomial with exact coefficient valuations over (p, d), q = p^d.
#[derive(Debug, Clone)]
pub struct ValuedPoly {
    pub p: u64,
    pub d: u32,
    pub coeffs: Coeffs,
}

#[derive(Debug, Clone)]
pub enum Coeffs {
    /// Exact integer coefficients, index 0..=degree.
    Int(Vec<i128>),
    /// Coefficients in an unramified p-adic ring mod p^N.
    Padic(Vec<PadicScalar>),
}

impl ValuedPoly {
    pub fn from_ints(p: u64, d: u32, coeffs: Vec<i128>) -> ValuedPoly {
        let mut c = coeffs;
        while c.last() == Some(&0) {
            c.pop();
        }
        ValuedPoly {
            p,
            d,
            coeffs: Coeffs::Int(c),
        }
    }

    pub fn from_padic(p: u64, d: u32, coeffs: Vec<PadicScalar>) -> ValuedPoly {
        let mut c = coeffs;
        while c.last().map(|s| s.is_zero()) == Some(true) {
            c.pop();
        }
        ValuedPoly {
            p,
            d,
            coeffs: Coeffs::Padic(c),
        }
    }

    pub fn degree(&self) -> Option<usize> {
        let n = match &self.coeffs {
            Coeffs::Int(v) => v.len(),
            Coeffs::Padic(v) => v.len(),
        };
        if n == 0 {
            None
        } else {
            Some(n - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// v_q of coefficient i; None when the coefficient is zero.
    pub fn coeff_val_q(&self, i: usize) -> Option<Rat> {
        match &self.coeffs {
            Coeffs::Int(v) => {
                let c = *v.get(i)?;
                if c == 0 {
                    return None;
                }
                Some(Rat::new(vp_i128(c, self.p) as i64, self.d as i64))
            }
            Coeffs::Padic(v) => {
                let s = v.get(i)?;
                let vp = s.val_p()?;
                Some(Rat::new(vp as i64, self.d as i64))
            }
        }
    }
}

/// p-adic valuation of a nonzero integer.
pub fn vp_i128(n: i128, p: u64) -> u32 {
    assert!(n != 0);
    let mut m = n.unsigned_abs();
    let p = p as u128;
    let mut v = 0;
    while m.is_multiple_of(p) {
        m /= p;
        v += 1;
    }
    v
}

/// A Newton polygon: ascending slopes with multiplicities, plus the
/// valuation of the prefactor a and the order of vanishing k at t = 0
/// (P = a t^k prod(1 - lambda_i t)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub segments: Vec<(Rat, u32)>,
    pub prefactor_valuation: Rat,
    pub t_power: u32,
}

impl NewtonPolygon {
    /// Multiset of slopes, one entry per reciprocal root.
    pub fn slope_multiset(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        for &(s, m) in &self.segments {
            for _ in 0..m {
                out.push(s);
            }
        }
        out
    }

    /// Total number of reciprocal roots.
    pub fn root_count(&self) -> u32 {
        self.segments.iter().map(|&(_, m)| m).sum()
    }

    /// Whether the slope multiset is invariant under s -> 2 - s.
    pub fn symmetric_about_one(&self) -> bool {
        let mut slopes = self.slope_multiset();
        let mut mirrored: Vec<Rat> = slopes.iter().map(|s| Rat::from_integer(2) - s).collect();
        slopes.sort();
        mirrored.sort();
        slopes == mirrored
    }
}

/// Lower convex hull of the points (i, v_q(b_i)); slopes are the valuations
/// of the reciprocal roots.
pub fn newton_polygon(poly: &ValuedPoly) -> Result<NewtonPolygon> {
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let deg = poly.degree().unwrap();
    let mut points: Vec<(i64, Rat)> = Vec::new();
    for i in 0..=deg {
        if let Some(v) = poly.coeff_val_q(i) {
            points.push((i as i64, v));
        }
    }
    if points.is_empty() {
        return Err(Error::PrecisionExhausted);
    }
    let t_power = points[0].0 as u32;
    let prefactor_valuation = points[0].1;
    // monotone-chain lower hull over exact rationals
    let mut hull: Vec<(i64, Rat)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // keep b only if it is strictly below segment a-pt
            let lhs = (b.1 - a.1) * Rat::from_integer(pt.0 - a.0);
            let rhs = (pt.1 - a.1) * Rat::from_integer(b.0 - a.0);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut segments: Vec<(Rat, u32)> = Vec::new();
    for w in hull.windows(2) {
        let run = w[1].0 - w[0].0;
        let slope = (w[1].1 - w[0].1) / Rat::from_integer(run);
        match segments.last_mut() {
            Some((s, m)) if *s == slope => *m += run as u32,
            _ => segments.push((slope, run as u32)),
        }
    }
    debug_assert_eq!(
        segments.iter().map(|&(_, m)| m as usize).sum::<usize>() + t_power as usize,
        deg,
        "hull multiplicities must account for every root"
    );
    Ok(NewtonPolygon {
        segments,
        prefactor_valuation,
        t_power,
    })
}

/// l_q(P) = sum over Newton slopes s <= 1 of (1 - s) * multiplicity.
pub fn l_q(poly: &ValuedPoly) -> Result<Rat> {
    let np = newton_polygon(poly)?;
    Ok(l_q_of_polygon(&np))
}

pub fn l_q_of_polygon(np: &NewtonPolygon) -> Rat {
    let one = Rat::from_integer(1);
    let mut acc = Rat::zero();
    for &(s, m) in &np.segments {
        if s <= one {
            acc += (one - s) * Rat::from_integer(m as i64);
        }
    }
    acc
}

/// l_q from a bare slope multiset.
pub fn l_q_of_slopes(slopes: &[Rat]) -> Rat {
    let one = Rat::from_integer(1);
    slopes
        .iter()
        .filter(|s| **s <= one)
        .map(|s| one - s)
        .fold(Rat::zero(), |a, b| a + b)
}

/// The closed-form minimum: v_q(a) - k - l_q(P), equal to
/// min over roots of unity eps of v_q(P(eps q^-1)).
pub fn min_valuation_formula(poly: &ValuedPoly) -> Result<Rat> {
    let np = newton_polygon(poly)?;
    Ok(np.prefactor_valuation - Rat::from_integer(np.t_power as i64) - l_q_of_polygon(&np))
}

/// One evaluated sample: the index j of the primitive root eps = zeta_m^j and
/// the exact v_q of P(eps q^-1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootOfUnitySample {
    pub order: u64,
    pub power: u64,
    pub val_q: Rat,
}

/// Evaluate v_q(P(eps q^-1)) at every primitive m-th root of unity eps,
/// realized as Teichmüller lifts inside W(F_{p^r}) with r the multiplicative
/// order of p mod m.
///
/// Only integer-coefficient polynomials are supported (the evaluation lives
/// in a single unramified ring).
pub fn eval_at_root_of_unity(
    poly: &ValuedPoly,
    m: u64,
    nprec: u32,
) -> Result<Vec<RootOfUnitySample>> {
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let ints = match &poly.coeffs {
        Coeffs::Int(v) => v,
        Coeffs::Padic(_) => {
            return Err(Error::Domain(
                "root-of-unity evaluation requires integer coefficients".into(),
            ))
        }
    };
    if m == 0 || ff::gcd_u64(m, poly.p) != 1 {
        return Err(Error::Domain(format!("order {m} not coprime to p")));
    }
    let deg = poly.degree().unwrap() as u64;
    let r = multiplicative_order(poly.p, m);
    let field: Arc<FieldTable> = ff::build_field(poly.p, r)?;
    let ring = PadicRing::new(&field, nprec)?;
    let zeta = if m == 1 {
        ring.one_elem()
    } else {
        let elem = element_of_order(&field, m)?;
        ring.teichmuller(elem)?
    };
    // q^(deg - i) scaling clears denominators: v_q(P(eps/q)) = v_q(sum_i b_i eps^i q^(deg-i)) - deg
    let q = BigUint::from(poly.p).pow(poly.d);
    let mut samples = Vec::new();
    for j in 0..m {
        if m > 1 && ff::gcd_u64(j, m) != 1 {
            continue;
        }
        let eps = ring.pow(&zeta, j);
        let mut acc = ring.zero_elem();
        let mut qpow = q.pow(deg as u32); // q^(deg - 0)
        for (i, &b) in ints.iter().enumerate() {
            if b != 0 {
                let term = ring.mul(
                    &ring.mul(&ring.from_i128(b), &ring.pow(&eps, i as u64)),
                    &ring.from_biguint(&qpow),
                );
                acc = ring.add(&acc, &term);
            }
            if (i as u64) < deg {
                qpow /= &q;
            }
        }
        let vp = acc.val_p().ok_or(Error::PrecisionExhausted)?;
        let val_q = Rat::new(vp as i64, poly.d as i64) - Rat::from_integer(deg as i64);
        samples.push(RootOfUnitySample {
            order: m,
            power: j,
            val_q,
        });
        if m == 1 {
            break;
        }
    }
    Ok(samples)
}

/// Multiplicative order of p modulo m (gcd(p, m) = 1); r = 1 for m = 1.
pub fn multiplicative_order(p: u64, m: u64) -> u32 {
    if m <= 2 {
        return 1;
    }
    let pm = p % m;
    let mut x = pm;
    let mut r = 1u32;
    while x != 1 {
        x = x * pm % m;
        r += 1;
    }
    r
}

/// Deterministically find a field element of exact multiplicative order m.
fn element_of_order(field: &Arc<FieldTable>, m: u64) -> Result<ff::FieldElem> {
    if !(field.q - 1).is_multiple_of(m) {
        return Err(Error::Internal(format!(
            "order {m} does not divide {} - 1",
            field.q
        )));
    }
    let step = (field.q - 1) / m;
    let mfac = ff::factor_u64(m);
    'cand: for c in 1..field.q {
        let z = field.pow(field.generator, step * c % (field.q - 1));
        if z == 1 && m > 1 {
            continue;
        }
        for &(l, _) in &mfac {
            if field.pow(z, m / l) == 1 {
                continue 'cand;
            }
        }
        return Ok(z);
    }
    Err(Error::Internal("no element of requested order".into()))
}

/// Result of driving the sampling schedule against the closed-form minimum.
#[derive(Debug, Clone)]
pub struct SamplingReport {
    pub formula: Rat,
    pub samples: Vec<RootOfUnitySample>,
    pub attained_at: Option<(u64, u64)>,
}

/// Sampling schedule: order m = 1, then primes != p ascending, until the
/// closed-form minimum is attained or ten orders are exhausted.
pub fn sampling_schedule(p: u64, count: usize) -> Vec<u64> {
    let mut orders = vec![1u64];
    let mut c = 2u64;
    while orders.len() < count {
        if ff::is_prime_u64(c) && c != p {
            orders.push(c);
        }
        c += 1;
    }
    orders
}

/// Run the schedule; errors with `MinimumNotAttained` if no sampled epsilon
/// reaches the predicted minimum.
///
/// Orders where every tracked digit of some sample vanishes are skipped: the
/// polynomial may have an exact root among those epsilon (the exceptional
/// set of the minimum identity), and a vanished value cannot lie below the
/// predicted minimum anyway.
pub fn verify_min_valuation(poly: &ValuedPoly, nprec: u32) -> Result<SamplingReport> {
    let formula = min_valuation_formula(poly)?;
    let mut samples = Vec::new();
    let mut attained_at = None;
    for m in sampling_schedule(poly.p, 10) {
        let batch = match eval_at_root_of_unity(poly, m, nprec) {
            Ok(b) => b,
            Err(Error::PrecisionExhausted) => continue,
            Err(e) => return Err(e),
        };
        for s in &batch {
            if s.val_q < formula {
                return Err(Error::Internal(format!(
                    "sampled valuation {} below the closed-form minimum {}",
                    s.val_q, formula
                )));
            }
            if s.val_q == formula && attained_at.is_none() {
                attained_at = Some((s.order, s.power));
            }
        }
        samples.extend(batch);
        if attained_at.is_some() {
            break;
        }
    }
    if attained_at.is_none() {
        return Err(Error::MinimumNotAttained);
    }
    Ok(SamplingReport {
        formula,
        samples,
        attained_at,
    })
}
