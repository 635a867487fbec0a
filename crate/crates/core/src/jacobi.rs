//! Dual-group combinatorics for the quotient of the degree-n Fermat surface,
//! Gauss/Jacobi sums with Stickelberger valuations, and the H^2 slope
//! multiset governing the family y^2 + xy = x^3 - T^n.
//!
//! The additive character never materializes: every computed quantity is
//! expressed through two-character Jacobi sums plus the classical
//! g(chi) g(chi^-1) = chi(-1) p^m identity, so all p-adic arithmetic stays
//! unramified.

use crate::curve::{self, WeierstrassCurve};
use crate::ff::{self, FieldTable, PadicRing, PadicScalar};
use crate::funcfield::{Poly, PolyRing, RatFunc};
use crate::padic::{l_q_of_slopes, Rat};
use crate::{Error, Result};
use num_bigint::BigUint;
use num_rational::Ratio;
use serde::Serialize;
use std::sync::Arc;

/// Largest field p^(d u) for which the direct Jacobi-sum oracle runs.
pub const DIRECT_SUM_LIMIT: u64 = 1 << 17;

/// An element (a_0..a_3) of the dual group with sum 0 mod n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharVec {
    pub n: u64,
    pub a: [u64; 4],
}

impl CharVec {
    /// k times the generator (-3, 6, -2, -1) of the rank-one dual lattice.
    pub fn from_k(n: u64, k: u64) -> CharVec {
        let k = k % n;
        let m = |c: u64| (k % n) * (c % n) % n;
        let a = [m(n - 3 % n), m(6 % n), m(n - 2 % n), m(n - 1)];
        debug_assert_eq!((a[0] + a[1] + a[2] + a[3]) % n, 0);
        CharVec { n, a }
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    /// Membership in the restricted dual group: a = 0 or all entries nonzero.
    pub fn admissible(&self) -> bool {
        self.is_zero() || self.a.iter().all(|&x| x != 0)
    }
}

/// An orbit of multiplication by q, keyed by its smallest multiplier k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRep {
    pub k: u64,
    pub rep: CharVec,
    /// Orbit length: smallest u >= 1 with q^u a = a.
    pub u: u32,
}

/// A Jacobi sum carried as an exact valuation and, when the field is small
/// enough to sum directly, a truncated p-adic value.
#[derive(Debug, Clone)]
pub struct JacobiValue {
    pub orbit: OrbitRep,
    /// v_q(J), exact (Stickelberger).
    pub valuation: Rat,
    pub padic: Option<PadicScalar>,
}

/// Digit-sum valuation of the Gauss sum g(alpha^-k, psi) over F_{p^m}:
/// s(k)/(p-1) in v_p units, for 1 <= k <= p^m - 2.
pub fn stickelberger_valuation(p: u64, k: u128, m: u32) -> Result<Rat> {
    let pm = (p as u128).pow(m);
    if k == 0 || k > pm - 2 {
        return Err(Error::Domain(format!("k = {k} outside [1, p^m - 2]")));
    }
    let mut s: u128 = 0;
    let mut kk = k;
    let p128 = p as u128;
    while kk > 0 {
        s += kk % p128;
        kk /= p128;
    }
    Ok(Ratio::new(s as i64, p as i64 - 1))
}

/// Orbits of multiplication by q on the admissible part of the dual lattice:
/// one representative per orbit of k (-3, 6, -2, -1), 0 <= k < n, keeping
/// k = 0 and those k with all four entries nonzero mod n.
pub fn orbit_list(n: u64, q: u64) -> Result<Vec<OrbitRep>> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if ff::gcd_u64(n, q) != 1 {
        return Err(Error::Domain(format!("gcd(n, q) = {} != 1", ff::gcd_u64(n, q))));
    }
    let mut seen = vec![false; n as usize];
    let mut orbits = Vec::new();
    for k in 0..n {
        if seen[k as usize] {
            continue;
        }
        // orbit of k under multiplication by q mod n
        let mut members = vec![k];
        let mut x = k * (q % n) % n;
        while x != k {
            members.push(x);
            x = x * (q % n) % n;
        }
        for &m in &members {
            seen[m as usize] = true;
        }
        let rep_k = *members.iter().min().unwrap();
        let rep = CharVec::from_k(n, rep_k);
        if !rep.admissible() {
            continue;
        }
        orbits.push(OrbitRep {
            k: rep_k,
            u: members.len() as u32,
            rep,
        });
    }
    orbits.sort_by_key(|o| o.k);
    Ok(orbits)
}

/// v_q(J(a)) by Stickelberger digit sums: with chi_i = alpha^(e_i),
/// e_i = (q^u - 1) a_i / n, the valuation is
/// (sum_i s(k_i)/(p-1) - m) / d where k_i = (q^u - 1) - e_i and m = d u.
pub fn jacobi_valuation(orbit: &OrbitRep, p: u64, d: u32) -> Result<Rat> {
    if orbit.rep.is_zero() {
        // J(0) = q by convention: v_q = 1
        return Ok(Rat::from_integer(1));
    }
    if !orbit.rep.admissible() {
        return Err(Error::Domain("vector has a zero entry but is not zero".into()));
    }
    let n = orbit.rep.n as u128;
    let m = d * orbit.u;
    let qu = (p as u128).pow(m); // q^u = p^(d u)
    let mut acc = Rat::from_integer(-(m as i64));
    for &ai in &orbit.rep.a {
        let e_i = (qu - 1) * (ai as u128) / n;
        debug_assert_eq!((qu - 1) * (ai as u128) % n, 0, "orbit length must kill a_i");
        let k_i = (qu - 1) - e_i;
        acc += stickelberger_valuation(p, k_i, m)?;
    }
    let v_q = acc / Rat::from_integer(d as i64);
    Ok(v_q)
}

/// Direct p-adic Jacobi sum over F_{q^u} (gated by field size): reduces the
/// four-character sum to two two-character sums via
/// g(chi1) g(chi2) = -J2(chi1, chi2) g(chi1 chi2) and
/// g(eta) g(eta^-1) = eta(-1) p^m, then sums Teichmüller values mod p^N.
pub fn jacobi_exact(orbit: &OrbitRep, p: u64, d: u32, nprec: u32) -> Result<PadicScalar> {
    let m = d * orbit.u;
    let mut q_u: u64 = 1;
    for _ in 0..m {
        q_u = q_u
            .checked_mul(p)
            .ok_or_else(|| Error::Unsupported("field too large for direct summation".into()))?;
        if q_u > DIRECT_SUM_LIMIT {
            return Err(Error::Unsupported(format!(
                "field of size p^{m} exceeds the direct-sum gate {DIRECT_SUM_LIMIT}"
            )));
        }
    }
    let field = ff::build_field(p, m)?;
    let ring = PadicRing::new(&field, nprec)?;
    if orbit.rep.is_zero() {
        // J(0) = q = p^d exactly
        return Ok(ring.from_biguint(&BigUint::from(p).pow(d)));
    }
    let n = orbit.rep.n;
    let qm1 = q_u - 1;
    let exps: Vec<u64> = orbit
        .rep
        .a
        .iter()
        .map(|&ai| ((qm1 as u128) * (ai as u128) / (n as u128)) as u64)
        .collect();
    debug_assert!(exps.iter().all(|&e| e != 0), "admissible vectors have nontrivial chi_i");
    debug_assert_eq!(exps.iter().map(|&e| e as u128).sum::<u128>() % qm1 as u128, 0);
    // pick a pairing with nontrivial intermediate product
    let pairings = [[0usize, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];
    let &pairing = pairings
        .iter()
        .find(|&&[a, b, _, _]| !(exps[a] + exps[b]).is_multiple_of(qm1))
        .ok_or_else(|| Error::Internal("no nondegenerate pairing".into()))?;
    let [ia, ib, ic, id] = pairing;
    // Teichmüller power table omega^j, omega the lift of the generator
    let omega = ring.teichmuller(field.generator)?;
    let mut powers: Vec<PadicScalar> = Vec::with_capacity(qm1 as usize);
    let mut cur = ring.one_elem();
    for _ in 0..qm1 {
        powers.push(cur.clone());
        cur = ring.mul(&cur, &omega);
    }
    let j2 = |e1: u64, e2: u64| -> Result<PadicScalar> {
        // J2(chi, lambda) = sum over x != 0, 1 of chi(x) lambda(1 - x)
        let log = field
            .log_table()
            .ok_or_else(|| Error::Internal("direct-sum field must carry tables".into()))?;
        let mut acc = ring.zero_elem();
        for x in 2..field.q {
            // skip x = 1 (then 1 - x = 0) and x = 0
            let one_minus = field.sub(1, x);
            if one_minus == 0 {
                continue;
            }
            let lx = log[x as usize] as u64;
            let ly = log[one_minus as usize] as u64;
            let idx = (ff::mulmod_u64(e1, lx, qm1) + ff::mulmod_u64(e2, ly, qm1)) % qm1;
            acc = ring.add(&acc, &powers[idx as usize]);
        }
        Ok(acc)
    };
    let j_ab = j2(exps[ia], exps[ib])?;
    let j_cd = j2(exps[ic], exps[id])?;
    let eta_exp = (exps[ia] + exps[ib]) % qm1;
    // eta(-1) = (-1)^eta_exp since alpha(-1) = -1
    let eta_minus_one = if qm1.is_multiple_of(2) && eta_exp % 2 == 1 {
        ring.from_i128(-1)
    } else {
        ring.one_elem()
    };
    Ok(ring.mul(&ring.mul(&j_ab, &j_cd), &eta_minus_one))
}

/// Both computations of a Jacobi sum, cross-checked when the direct sum is
/// feasible: v_p of the p-adic value must equal the digit-sum prediction.
pub fn jacobi_value(orbit: &OrbitRep, p: u64, d: u32, nprec: u32) -> Result<JacobiValue> {
    let valuation = jacobi_valuation(orbit, p, d)?;
    let padic = match jacobi_exact(orbit, p, d, nprec) {
        Ok(v) => {
            let vp = v.val_p().ok_or(Error::PrecisionExhausted)?;
            let predicted = valuation * Rat::from_integer(d as i64);
            if Rat::from_integer(vp as i64) != predicted {
                return Err(Error::Internal(format!(
                    "direct Jacobi valuation {vp} disagrees with digit-sum prediction {predicted} at k = {}",
                    orbit.k
                )));
            }
            Some(v)
        }
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(JacobiValue {
        orbit: orbit.clone(),
        valuation,
        padic,
    })
}

/// The H^2 slope data of the Fermat-surface quotient: each orbit contributes
/// u copies of slope v_q(J)/u; total degree is the sum of orbit lengths.
#[derive(Debug, Clone)]
pub struct H2Data {
    pub n: u64,
    pub orbits: Vec<JacobiValue>,
    pub degree: u32,
    pub slopes: Vec<Rat>,
    pub l_q: Rat,
}

pub fn h2_polynomial(p: u64, d: u32, n: u64) -> Result<H2Data> {
    h2_polynomial_checked(p, d, n, 0)
}

/// As `h2_polynomial`; nprec > 0 additionally runs the direct p-adic oracle
/// on every orbit within the size gate.
pub fn h2_polynomial_checked(p: u64, d: u32, n: u64, nprec: u32) -> Result<H2Data> {
    let q = {
        let mut acc = 1u64;
        for _ in 0..d {
            acc *= p;
        }
        acc
    };
    let orbits = orbit_list(n, q)?;
    let mut values = Vec::new();
    let mut slopes = Vec::new();
    let mut degree = 0u32;
    for orbit in &orbits {
        let value = if nprec > 0 {
            jacobi_value(orbit, p, d, nprec)?
        } else {
            JacobiValue {
                orbit: orbit.clone(),
                valuation: jacobi_valuation(orbit, p, d)?,
                padic: None,
            }
        };
        let slope = value.valuation / Rat::from_integer(orbit.u as i64);
        for _ in 0..orbit.u {
            slopes.push(slope);
        }
        degree += orbit.u;
        values.push(value);
    }
    slopes.sort();
    // weight-2 pairing: the multiset must be symmetric under s -> 2 - s
    let mut mirrored: Vec<Rat> = slopes
        .iter()
        .map(|s| Rat::from_integer(2) - s)
        .collect();
    mirrored.sort();
    if mirrored != slopes {
        return Err(Error::Internal("H^2 slope multiset not symmetric about 1".into()));
    }
    let l_q = l_q_of_slopes(&slopes);
    Ok(H2Data {
        n,
        orbits: values,
        degree,
        slopes,
        l_q,
    })
}

/// The curve y^2 + xy = x^3 - T^n.
pub fn ulmer_curve(field: &Arc<FieldTable>, n: u32) -> WeierstrassCurve {
    let ring = PolyRing::new(field.as_ref());
    let mut tn = vec![0u64; n as usize + 1];
    tn[n as usize] = 1;
    let a6 = RatFunc::from_poly(ring.neg(&Poly::from_coeffs(tn)));
    WeierstrassCurve::new(
        field,
        [
            RatFunc::from_poly(Poly::one()),
            RatFunc::zero(),
            RatFunc::zero(),
            RatFunc::zero(),
            a6,
        ],
    )
}

/// One orbit row of the report.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitRow {
    pub k: u64,
    pub u: u32,
    pub valuation: String,
}

/// The assembled fast-path report for y^2 + xy = x^3 - T^n.
#[derive(Debug, Clone, Serialize)]
pub struct UlmerReport {
    pub p: u64,
    pub d: u32,
    pub n: u64,
    pub deg_delta: i64,
    pub deg_conductor: i64,
    pub deg_conductor_finite: i64,
    /// 12 ceil(n/6), the closed form for the family.
    pub deg_delta_expected: i64,
    pub orbits: Vec<OrbitRow>,
    pub slopes: Vec<String>,
    pub l_q: String,
    /// d (deg Delta / 12 - 1).
    pub upper_bound: String,
    /// d l_q from the Jacobi slope data (trivial-character scan).
    pub lower_bound: String,
    /// Exact value when the hypothesis gate (6 | n, n | q - 1) holds and the
    /// bounds pinch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manin_exact: Option<i64>,
    pub bounds_pinched: bool,
}

pub fn rat_string(r: Rat) -> String {
    if r.denom() == &1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Cross-checked report: reduction data from the curve side, slopes from the
/// Jacobi side, and the Manin-constant verdict when the bounds pinch under
/// the hypothesis gate.
pub fn ulmer_report(p: u64, d: u32, n: u64, nprec: u32) -> Result<UlmerReport> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if n.is_multiple_of(p) {
        return Err(Error::Domain(format!("p = {p} must not divide n = {n}")));
    }
    let field = ff::build_field(p, d)?;
    let q = field.q;
    let e = ulmer_curve(&field, n as u32);
    let red = curve::global_reduction(&e)?;
    let h2 = h2_polynomial_checked(p, d, n, nprec)?;
    let upper = Rat::from_integer(d as i64) * (Rat::new(red.deg_delta, 12) - Rat::from_integer(1));
    let lower = Rat::from_integer(d as i64) * h2.l_q;
    if lower > upper {
        return Err(Error::Internal(format!(
            "lower bound {lower} exceeds upper bound {upper}"
        )));
    }
    let pinched = lower == upper;
    let gate = n.is_multiple_of(6) && (q - 1) % n == 0;
    let manin_exact = if gate && pinched && upper.denom() == &1 {
        Some(*upper.numer())
    } else {
        None
    };
    if let Some(mv) = manin_exact {
        // for q = p the closed form n/6 - 1 must agree
        if d == 1 && mv != (n as i64) / 6 - 1 {
            return Err(Error::Internal(format!(
                "pinched value {mv} disagrees with n/6 - 1"
            )));
        }
    }
    Ok(UlmerReport {
        p,
        d,
        n,
        deg_delta: red.deg_delta,
        deg_conductor: red.deg_conductor,
        deg_conductor_finite: red.deg_conductor_finite,
        deg_delta_expected: 12 * ((n as i64 + 5) / 6),
        orbits: h2
            .orbits
            .iter()
            .map(|v| OrbitRow {
                k: v.orbit.k,
                u: v.orbit.u,
                valuation: rat_string(v.valuation),
            })
            .collect(),
        slopes: h2.slopes.iter().map(|s| rat_string(*s)).collect(),
        l_q: rat_string(h2.l_q),
        upper_bound: rat_string(upper),
        lower_bound: rat_string(lower),
        manin_exact,
        bounds_pinched: pinched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Ratio::new(n, d)
    }

    #[test]
    fn stickelberger_examples() {
        assert_eq!(stickelberger_valuation(7, 3, 1).unwrap(), rat(1, 2));
        assert_eq!(stickelberger_valuation(13, 6, 1).unwrap(), rat(1, 2));
        // k = 8 = 1*7 + 1: digits (1,1) -> 2/6 = 1/3
        assert_eq!(stickelberger_valuation(7, 8, 2).unwrap(), rat(1, 3));
        assert!(stickelberger_valuation(7, 0, 1).is_err());
        assert!(stickelberger_valuation(7, 6, 1).is_err()); // p - 1 = q - 2 + 1 out of range
    }

    #[test]
    fn orbits_n12_q13() {
        let orbits = orbit_list(12, 13).unwrap();
        let ks: Vec<u64> = orbits.iter().map(|o| o.k).collect();
        assert_eq!(ks, vec![0, 1, 3, 5, 7, 9, 11]);
        assert!(orbits.iter().all(|o| o.u == 1));
    }

    #[test]
    fn orbits_n6_q7_only_zero() {
        let orbits = orbit_list(6, 7).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].k, 0);
    }

    #[test]
    fn orbits_n5_membership() {
        // 6 does not divide 5: admissibility is the direct all-nonzero test
        let orbits = orbit_list(5, 7).unwrap();
        // k a = (-3k, 6k, -2k, -k) mod 5 = (2k, k, 3k, 4k): nonzero for all k != 0
        let total: u32 = orbits.iter().map(|o| o.u).sum();
        assert_eq!(total, 5);
        assert!(orbit_list(5, 10).is_err());
    }

    #[test]
    fn jacobi_valuations_13_12() {
        let orbits = orbit_list(12, 13).unwrap();
        let vals: Vec<(u64, Rat)> = orbits
            .iter()
            .map(|o| (o.k, jacobi_valuation(o, 13, 1).unwrap()))
            .collect();
        let expect = vec![
            (0, rat(1, 1)),
            (1, rat(0, 1)),
            (3, rat(1, 1)),
            (5, rat(1, 1)),
            (7, rat(1, 1)),
            (9, rat(1, 1)),
            (11, rat(2, 1)),
        ];
        assert_eq!(vals, expect);
    }

    #[test]
    fn h2_13_12_slope_multiset() {
        let h2 = h2_polynomial(13, 1, 12).unwrap();
        assert_eq!(h2.degree, 7);
        let slope_counts: Vec<(Rat, usize)> = {
            let mut out: Vec<(Rat, usize)> = Vec::new();
            for s in &h2.slopes {
                match out.last_mut() {
                    Some((t, c)) if t == s => *c += 1,
                    _ => out.push((*s, 1)),
                }
            }
            out
        };
        assert_eq!(
            slope_counts,
            vec![(rat(0, 1), 1), (rat(1, 1), 5), (rat(2, 1), 1)]
        );
        assert_eq!(h2.l_q, rat(1, 1));
    }

    #[test]
    fn h2_7_6_degree_one() {
        let h2 = h2_polynomial(7, 1, 6).unwrap();
        assert_eq!(h2.degree, 1);
        assert_eq!(h2.slopes, vec![rat(1, 1)]);
        assert_eq!(h2.l_q, rat(0, 1));
    }

    #[test]
    fn jacobi_exact_cross_validation() {
        // every orbit's direct Teichmüller sum has v_p equal to the digit-sum
        // prediction, exactly
        for (p, n) in [(7u64, 6u64), (13, 12), (13, 4), (13, 6)] {
            let q = p;
            let orbits = orbit_list(n, q).unwrap();
            for orbit in &orbits {
                let val = jacobi_value(orbit, p, 1, 20).unwrap();
                assert!(
                    val.padic.is_some(),
                    "direct sum must run for (p, n) = ({p}, {n})"
                );
            }
        }
    }

    #[test]
    fn jacobi_exact_j0_is_q() {
        let orbits = orbit_list(6, 7).unwrap();
        let v = jacobi_exact(&orbits[0], 7, 1, 16).unwrap();
        let field = ff::build_field(7, 1).unwrap();
        let ring = PadicRing::new(&field, 16).unwrap();
        assert_eq!(v, ring.from_i128(7));
    }

    #[test]
    fn jacobi_exact_nontrivial_orbit_length() {
        // n = 4, q = 7 = 3 mod 4: k = 1 and k = 3 fuse into one orbit of
        // length 2 over F_49
        let orbits = orbit_list(4, 7).unwrap();
        let nonzero: Vec<&OrbitRep> = orbits.iter().filter(|o| o.k != 0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].u, 2);
        let val = jacobi_value(nonzero[0], 7, 1, 20).unwrap();
        assert!(val.padic.is_some());
        // weight 2: 0 <= v_q <= 2
        assert!(val.valuation >= rat(0, 1) && val.valuation <= rat(2, 1));
    }

    #[test]
    fn valuation_constant_on_orbits() {
        // J(qa) = J(a): recompute the valuation from a non-minimal member
        let n = 9u64;
        let q = 11u64;
        let orbits = orbit_list(n, q).unwrap();
        for orbit in orbits.iter().filter(|o| o.k != 0) {
            let k2 = orbit.k * q % n;
            let shifted = OrbitRep {
                k: k2,
                rep: CharVec::from_k(n, k2),
                u: orbit.u,
            };
            assert_eq!(
                jacobi_valuation(orbit, 11, 1).unwrap(),
                jacobi_valuation(&shifted, 11, 1).unwrap()
            );
        }
    }

    #[test]
    fn weight_bounds_all_orbits() {
        for (p, n) in [(7u64, 6u64), (13, 12), (13, 4), (13, 6), (11, 9), (11, 5)] {
            for orbit in orbit_list(n, p).unwrap() {
                let v = jacobi_valuation(&orbit, p, 1).unwrap();
                assert!(v >= rat(0, 1) && v <= rat(2, 1) * rat(orbit.u as i64, 1));
            }
        }
    }

    #[test]
    fn valuation_zero_orbit_count() {
        // for q = p, n | p - 1, 6 | n: exactly n/6 - 1 orbits of valuation 0
        for (p, n) in [(7u64, 6u64), (13, 12), (31, 6), (37, 12), (43, 6), (61, 12)] {
            assert_eq!((p - 1) % n, 0);
            let orbits = orbit_list(n, p).unwrap();
            let zeros = orbits
                .iter()
                .filter(|o| jacobi_valuation(o, p, 1).unwrap() == rat(0, 1))
                .count();
            assert_eq!(zeros as u64, n / 6 - 1, "(p, n) = ({p}, {n})");
        }
    }

    #[test]
    fn ulmer_report_7_6() {
        let r = ulmer_report(7, 1, 6, 20).unwrap();
        assert_eq!(r.deg_delta, 12);
        assert_eq!(r.deg_conductor, 7);
        assert_eq!(r.manin_exact, Some(0));
        assert_eq!(r.l_q, "0");
    }

    #[test]
    fn ulmer_report_13_12() {
        let r = ulmer_report(13, 1, 12, 20).unwrap();
        assert_eq!(r.deg_delta, 24);
        assert_eq!(r.deg_conductor, 13);
        assert_eq!(r.manin_exact, Some(1));
        assert_eq!(r.l_q, "1");
        assert_eq!(r.orbits.len(), 7);
    }

    #[test]
    fn ulmer_report_11_9_gate() {
        // 6 does not divide 9: bounds only, no exactness claim
        let r = ulmer_report(11, 1, 9, 0).unwrap();
        assert_eq!(r.manin_exact, None);
        assert_eq!(r.deg_delta, 24);
    }

    #[test]
    fn ulmer_report_rejects_p_dividing_n() {
        assert!(ulmer_report(7, 1, 7, 0).is_err());
        assert!(ulmer_report(7, 1, 14, 0).is_err());
    }
}
