//! Assembles L-function, slope and reduction invariants into rigorous
//! lower/upper bounds for the Manin constant m(E) — exact values when the
//! bounds pinch — plus Pesenti-Szpiro checks and modular-degree bounds.

use crate::curve::{self, WeierstrassCurve};
use crate::ff;
use crate::funcfield::{dirichlet_lfunction, DirichletCharacter};
use crate::jacobi;
use crate::lfun::{self, EulerCache, LMode};
use crate::padic::Rat;
use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

/// One character's contribution to the lower-bound scan.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub character: String,
    pub contribution: String,
}

/// Lower/upper bounds for m(E) with provenance.
#[derive(Debug, Clone)]
pub struct ManinBounds {
    /// d sup over the scanned characters (a restricted scan, never claimed
    /// to exhaust the sup).
    pub lower: Rat,
    /// d (deg Delta / 12 + g - 1).
    pub upper: Rat,
    /// Set only when lower = upper and both are integers.
    pub exact: Option<i64>,
    pub witnesses: Vec<Witness>,
    /// Newton-equals-Hodge verdict in dimension 2, when l_q(L) is known.
    pub ordinary: Option<bool>,
}

/// Upper bound of the discriminant theorem: d (deg Delta / 12 + g - 1),
/// g = 0 here; asserts 12 | deg Delta.
pub fn upper_thm13(e: &WeierstrassCurve) -> Result<Rat> {
    if curve::is_isotrivial(e)? {
        return Err(Error::Domain("bound requires a non-isotrivial curve".into()));
    }
    let red = curve::global_reduction(e)?;
    upper_from_deg_delta(red.deg_delta, e.field.k)
}

pub fn upper_from_deg_delta(deg_delta: i64, d: u32) -> Result<Rat> {
    if deg_delta % 12 != 0 {
        return Err(Error::Internal(format!(
            "deg Delta = {deg_delta} not divisible by 12"
        )));
    }
    Ok(Rat::from_integer(d as i64) * (Rat::new(deg_delta, 12) - Rat::from_integer(1)))
}

/// The lower-bound scan: d max over {trivial} union characters of
/// (l_q(L(E, alpha, t)) + g - 1 - v_q(epsilon(alpha^{-1}))). The trivial
/// character contributes d l_q(L(E, t)) since epsilon(1) = +-q^(g-1).
pub fn lower_prop45(
    e: &WeierstrassCurve,
    characters: &[DirichletCharacter],
    nprec: u32,
    cache: &EulerCache,
    max_count_degree: Option<u32>,
) -> Result<(Rat, Vec<Witness>)> {
    let d = e.field.k as i64;
    let asm = lfun::LAssembly::new(e)?;
    let mut witnesses = Vec::new();
    let l = lfun::lfunction_with(&asm, LMode::Completed, cache, max_count_degree)?;
    let trivial = Rat::from_integer(d) * l.l_q()?;
    witnesses.push(Witness {
        character: "trivial".into(),
        contribution: jacobi::rat_string(trivial),
    });
    let mut best = trivial;
    for alpha in characters {
        let twisted = lfun::twisted_lfunction_with(&asm, alpha, nprec, cache, max_count_degree)?;
        let lq = twisted.l_q()?;
        let inv = alpha.inverse();
        let dl = dirichlet_lfunction(&inv, nprec)?;
        let eps_val = dl.epsilon_valuation()?;
        // cross-check against the Stickelberger product formula
        let predicted = inv.epsilon_valuation_prediction();
        if eps_val != predicted {
            return Err(Error::Internal(format!(
                "epsilon valuation {eps_val} disagrees with digit-sum products {predicted} for {}",
                inv.description()
            )));
        }
        let contribution = Rat::from_integer(d) * (lq - Rat::from_integer(1) - eps_val);
        witnesses.push(Witness {
            character: alpha.description(),
            contribution: jacobi::rat_string(contribution),
        });
        if contribution > best {
            best = contribution;
        }
    }
    Ok((best, witnesses))
}

/// Ordinariness in dimension 2: l_q(L(E, t)) = deg Delta / 12 + g - 1.
/// When true, the discriminant bound is an equality.
pub fn ordinary_check(l_q: Rat, deg_delta: i64) -> bool {
    l_q == Rat::new(deg_delta, 12) - Rat::from_integer(1)
}

/// Pesenti-Szpiro data after full descent.
#[derive(Debug, Clone, Serialize)]
pub struct PesentiSzpiroReport {
    /// Descents applied to reach j not in K^p.
    pub descent_steps: u32,
    pub deg_delta_descended: i64,
    pub deg_conductor: i64,
    /// 6 (deg n + 2g - 2) with g = 0.
    pub bound: i64,
    pub holds: bool,
    /// Cor 7.7-style bound on m(E): d (deg n / 2 + 2g - 2), raw.
    pub conductor_bound_raw: String,
    /// The same bound floored to an integer.
    pub conductor_bound_floor: i64,
}

/// deg Delta <= 6 (deg n - 2) after descending to a curve minimal under
/// Frobenius twists, plus the conductor-only bound on m(E).
pub fn pesenti_szpiro_check(e: &WeierstrassCurve) -> Result<PesentiSzpiroReport> {
    let (descended, steps) = curve::descend_fully(e)?;
    let red = curve::global_reduction(&descended)?;
    let d = e.field.k as i64;
    let bound = 6 * (red.deg_conductor - 2);
    let raw = Rat::from_integer(d) * (Rat::new(red.deg_conductor, 2) - Rat::from_integer(2));
    Ok(PesentiSzpiroReport {
        descent_steps: steps,
        deg_delta_descended: red.deg_delta,
        deg_conductor: red.deg_conductor,
        bound,
        holds: red.deg_delta <= bound,
        conductor_bound_raw: jacobi::rat_string(raw),
        conductor_bound_floor: raw.floor().to_integer(),
    })
}

/// The conductor-only bound on m(E).
#[derive(Debug, Clone, Serialize)]
pub struct Cor77Bound {
    pub raw: String,
    pub floor: i64,
}

/// Numeric modular-degree bounds.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeBoundReport {
    pub q: u64,
    pub g: u32,
    pub deg_infinity: u32,
    pub deg_m: u32,
    pub m_upper_used: u32,
    /// q^(18g + 4 deg inf + 1) q^(2 deg m) (deg m)^3.
    pub thm108_bound: String,
    /// c~^2 q^(14g + deg inf + 5) q^(deg m) (deg m)^3.
    pub thm107_bound: String,
    /// c~ <= (q^(deg inf) - 1) p^(m_upper).
    pub c_tilde_bound: String,
}

/// Evaluate the degree bounds (pure formula arithmetic; any prime power q).
pub fn degree_bounds(
    q: u64,
    g: u32,
    deg_infinity: u32,
    deg_m: u32,
    m_upper: u32,
) -> Result<DegreeBoundReport> {
    if deg_m == 0 {
        return Err(Error::Domain("deg m must be >= 1".into()));
    }
    if q < 2 {
        return Err(Error::Domain("q must be at least 2".into()));
    }
    let fac = ff::factor_u64(q);
    if fac.len() != 1 {
        return Err(Error::Domain(format!("q = {q} is not a prime power")));
    }
    let p = fac[0].0;
    let qb = BigUint::from(q);
    let m3 = BigUint::from(deg_m).pow(3);
    let thm108 = qb.pow(18 * g + 4 * deg_infinity + 1) * qb.pow(2 * deg_m) * &m3;
    let c_tilde = (qb.pow(deg_infinity) - BigUint::one()) * BigUint::from(p).pow(m_upper);
    let thm107 = &c_tilde * &c_tilde * qb.pow(14 * g + deg_infinity + 5) * qb.pow(deg_m) * &m3;
    Ok(DegreeBoundReport {
        q,
        g,
        deg_infinity,
        deg_m,
        m_upper_used: m_upper,
        thm108_bound: thm108.to_string(),
        thm107_bound: thm107.to_string(),
        c_tilde_bound: c_tilde.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Full analysis
// ---------------------------------------------------------------------------

/// Per-place row of the reduction table.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionRow {
    pub place: String,
    pub degree: u32,
    pub kodaira: String,
    pub v_delta: u32,
    pub conductor_exponent: u8,
}

/// The assembled analysis report.
#[derive(Debug, Clone, Serialize)]
pub struct ManinReport {
    pub curve: String,
    pub p: u64,
    pub d: u32,
    pub deg_delta: i64,
    pub deg_conductor: i64,
    pub lower: String,
    pub upper: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordinary: Option<bool>,
    /// Which engine produced l_q: "counted", "jacobi", or "none" when the
    /// slow path was skipped.
    pub l_q_method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_q: Option<String>,
    /// The scan is restricted to the supplied tame characters; exactness is
    /// claimed only from a pinch, never from scan exhaustion.
    pub scan: String,
    pub witnesses: Vec<Witness>,
    pub pesenti_szpiro: PesentiSzpiroReport,
    /// The conductor-only bound d (deg n / 2 - 2), raw and floored.
    pub cor77: Cor77Bound,
    pub reduction: Vec<ReductionRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lfunction: Option<serde_json::Value>,
}

/// Knobs for `analyze`.
pub struct AnalyzeOptions<'a> {
    pub characters: Vec<DirichletCharacter>,
    pub nprec: u32,
    /// Largest place degree the slow path may count; None = unbounded.
    pub max_count_degree: Option<u32>,
    pub cache: &'a EulerCache,
    /// Attach the L-polynomial JSON when computed.
    pub emit_lfunction: bool,
}

/// Recognize y^2 + xy = x^3 - T^n (the fast Jacobi path applies).
pub fn ulmer_shape(e: &WeierstrassCurve) -> Option<u32> {
    let f = e.field.as_ref();
    let [a1, a2, a3, a4, a6] = &e.a;
    let one = crate::funcfield::Poly::one();
    if a1.num != one || !a1.den.is_constant() {
        return None;
    }
    if !a2.is_zero() || !a3.is_zero() || !a4.is_zero() {
        return None;
    }
    if a6.den != one || a6.num.is_zero() {
        return None;
    }
    let n = a6.num.degree() as u32;
    if n == 0 {
        return None;
    }
    let minus_one = f.from_int(-1);
    let ok = a6
        .num
        .coeffs
        .iter()
        .enumerate()
        .all(|(i, &c)| if i == n as usize { c == minus_one } else { c == 0 });
    if ok {
        Some(n)
    } else {
        None
    }
}

/// Full bound assembly for one curve: reduction table, upper and lower
/// bounds, ordinariness and exactness verdicts, Pesenti-Szpiro check.
pub fn analyze(e: &WeierstrassCurve, opts: &AnalyzeOptions) -> Result<ManinReport> {
    if e.field.p < 5 {
        return Err(Error::Unsupported("p < 5".into()));
    }
    if curve::is_isotrivial(e)? {
        return Err(Error::Domain("analysis requires a non-isotrivial curve".into()));
    }
    let d = e.field.k;
    let red = curve::global_reduction(e)?;
    let upper = upper_from_deg_delta(red.deg_delta, d)?;
    let mut witnesses: Vec<Witness> = Vec::new();
    let mut l_json = None;
    let mut l_q: Option<Rat> = None;
    let mut method = "none";
    let mut lower = Rat::from_integer(0); // m(E) is a nonnegative integer
    // l_q of the untwisted L: counted when within the gate, else through the
    // Jacobi fast path for the T^n family
    match lfun::lfunction(e, LMode::Completed, opts.cache, opts.max_count_degree) {
        Ok(l) => {
            method = "counted";
            l_q = Some(l.l_q()?);
            if opts.emit_lfunction {
                l_json = Some(l.to_json());
            }
            let (scan_lower, w) =
                lower_prop45(e, &opts.characters, opts.nprec, opts.cache, opts.max_count_degree)?;
            witnesses = w;
            lower = lower.max(scan_lower);
        }
        Err(Error::Domain(_)) | Err(Error::Unsupported(_)) => {
            if let Some(n) = ulmer_shape(e) {
                if !(n as u64).is_multiple_of(e.field.p) {
                    let h2 = jacobi::h2_polynomial(e.field.p, d, n as u64)?;
                    method = "jacobi";
                    l_q = Some(h2.l_q);
                    let contribution = Rat::from_integer(d as i64) * h2.l_q;
                    witnesses.push(Witness {
                        character: "trivial (jacobi slopes)".into(),
                        contribution: jacobi::rat_string(contribution),
                    });
                    lower = lower.max(contribution);
                }
            }
        }
        Err(other) => return Err(other),
    }
    if lower > upper {
        return Err(Error::Internal(format!(
            "lower bound {lower} exceeds upper bound {upper}"
        )));
    }
    let ordinary = l_q.map(|lq| ordinary_check(lq, red.deg_delta));
    let exact = if lower == upper && upper.denom() == &1 {
        Some(*upper.numer())
    } else if ordinary == Some(true) && upper.denom() == &1 {
        // Newton = Hodge forces equality in the discriminant bound
        Some(*upper.numer())
    } else {
        None
    };
    let ps = pesenti_szpiro_check(e)?;
    let cor77_raw =
        Rat::from_integer(d as i64) * (Rat::new(red.deg_conductor, 2) - Rat::from_integer(2));
    let field = e.field.as_ref();
    let reduction: Vec<ReductionRow> = red
        .locals
        .iter()
        .map(|loc| ReductionRow {
            place: loc.place.label(field),
            degree: loc.place.degree,
            kodaira: loc.kodaira.to_string(),
            v_delta: loc.v_delta_min,
            conductor_exponent: loc.conductor_exponent,
        })
        .collect();
    Ok(ManinReport {
        curve: e.to_spec_string(),
        p: e.field.p,
        d,
        deg_delta: red.deg_delta,
        deg_conductor: red.deg_conductor,
        lower: jacobi::rat_string(lower),
        upper: jacobi::rat_string(upper),
        exact,
        ordinary,
        l_q_method: method.to_string(),
        l_q: l_q.map(jacobi::rat_string),
        scan: format!(
            "restricted scan over {} tame character(s); exactness only via pinch or ordinariness",
            opts.characters.len()
        ),
        witnesses,
        pesenti_szpiro: ps,
        cor77: Cor77Bound {
            raw: jacobi::rat_string(cor77_raw),
            floor: cor77_raw.floor().to_integer(),
        },
        reduction,
        lfunction: l_json,
    })
}
