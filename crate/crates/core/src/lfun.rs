//! Euler factors, full and twisted L-polynomial assembly with
//! functional-equation completion, Fourier coefficients, epsilon extraction,
//! the two-term G-factor, and a persistent point-count cache.
//!
//! Fiber counting parallelizes over places with rayon; every reduction is an
//! order-independent exact sum, so results are identical for any thread count.

use crate::curve::{self, GlobalReduction, Kodaira, LocalReduction, WeierstrassCurve};
use crate::ff::{self, FieldElem, PadicRing, PadicScalar};
use crate::funcfield::{
    places_of_degree, CharValue, DirichletCharacter, Divisor, Place, PolyRing,
};
use crate::padic::{Coeffs, Rat, ValuedPoly};
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

// ---------------------------------------------------------------------------
// Euler cache
// ---------------------------------------------------------------------------

/// Persistent map (curve fingerprint, place, extension degree) -> trace.
///
/// Concurrent writers are fine: identical values win silently, conflicting
/// values are rejected as an internal error.
#[derive(Debug, Default)]
pub struct EulerCache {
    map: Mutex<HashMap<(String, String, u32), i64>>,
    pub path: Option<PathBuf>,
    enabled: bool,
}

const CACHE_VERSION: &str = env!("CARGO_PKG_VERSION");

impl EulerCache {
    pub fn in_memory() -> EulerCache {
        EulerCache {
            map: Mutex::new(HashMap::new()),
            path: None,
            enabled: true,
        }
    }

    pub fn disabled() -> EulerCache {
        EulerCache {
            map: Mutex::new(HashMap::new()),
            path: None,
            enabled: false,
        }
    }

    /// Load from a cache file, or start empty when the file does not exist.
    pub fn load(path: &Path, p: u64, d: u32) -> Result<EulerCache> {
        let mut cache = EulerCache::in_memory();
        cache.path = Some(path.to_path_buf());
        let file = match std::fs::File::open(path) {
            Ok(f) => f,
            Err(_) => return Ok(cache),
        };
        let reader = std::io::BufReader::new(file);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::Parse(format!("cache read: {e}")))?
            .ok_or_else(|| Error::Parse("empty cache file".into()))?;
        let expect_prefix = format!("ffmanin-cache,p={p},d={d},version=");
        if !header.starts_with(&expect_prefix) {
            return Err(Error::Parse(format!(
                "cache header mismatch: {header:?} does not start with {expect_prefix:?}"
            )));
        }
        let mut map = HashMap::new();
        for line in lines {
            let line = line.map_err(|e| Error::Parse(format!("cache read: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Parse(format!("bad cache line: {line}")));
            }
            let ext: u32 = parts[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad cache line: {line}")))?;
            let trace: i64 = parts[3]
                .parse()
                .map_err(|_| Error::Parse(format!("bad cache line: {line}")))?;
            map.insert((parts[0].to_string(), parts[1].to_string(), ext), trace);
        }
        cache.map = Mutex::new(map);
        Ok(cache)
    }

    /// Write out sorted records under the standard header.
    pub fn save(&self, p: u64, d: u32) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let map = self.map.lock().unwrap();
        let mut rows: Vec<(&(String, String, u32), &i64)> = map.iter().collect();
        rows.sort();
        let mut out = std::fs::File::create(path)
            .map_err(|e| Error::Parse(format!("cache write: {e}")))?;
        writeln!(out, "ffmanin-cache,p={p},d={d},version={CACHE_VERSION}")
            .map_err(|e| Error::Parse(format!("cache write: {e}")))?;
        for ((fp, place, ext), trace) in rows {
            writeln!(out, "{fp},{place},{ext},{trace}")
                .map_err(|e| Error::Parse(format!("cache write: {e}")))?;
        }
        Ok(())
    }

    pub fn get(&self, fp: &str, place: &str, ext: u32) -> Option<i64> {
        if !self.enabled {
            return None;
        }
        self.map
            .lock()
            .unwrap()
            .get(&(fp.to_string(), place.to_string(), ext))
            .copied()
    }

    pub fn insert(&self, fp: &str, place: &str, ext: u32, trace: i64) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        let mut map = self.map.lock().unwrap();
        match map.insert((fp.to_string(), place.to_string(), ext), trace) {
            Some(old) if old != trace => Err(Error::Internal(format!(
                "cache conflict at ({fp}, {place}, {ext}): {old} vs {trace}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> Vec<(String, String, u32, i64)> {
        let map = self.map.lock().unwrap();
        let mut rows: Vec<_> = map
            .iter()
            .map(|((a, b, c), t)| (a.clone(), b.clone(), *c, *t))
            .collect();
        rows.sort();
        rows
    }
}

// ---------------------------------------------------------------------------
// Local factors
// ---------------------------------------------------------------------------

/// The shape of the local Euler denominator at one place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalKind {
    Good { trace: i64 },
    Mult { split: bool },
    Additive,
}

/// A place with its local Euler data.
#[derive(Debug, Clone)]
pub struct PlaceTerm {
    pub place: Place,
    pub degree: u32,
    pub kind: LocalKind,
}

impl PlaceTerm {
    /// Coefficients of the local denominator in T = t^deg:
    /// good: 1 - a T + q^deg T^2; split: 1 - T; nonsplit: 1 + T; additive: 1.
    pub fn denominator(&self, q: u64) -> Vec<i128> {
        match self.kind {
            LocalKind::Good { trace } => {
                vec![1, -(trace as i128), (q as i128).pow(self.degree)]
            }
            LocalKind::Mult { split: true } => vec![1, -1],
            LocalKind::Mult { split: false } => vec![1, 1],
            LocalKind::Additive => vec![1],
        }
    }
}

/// The local Euler factor of E at a place, as the denominator polynomial.
pub fn euler_factor(e: &WeierstrassCurve, place: &Place) -> Result<PlaceTerm> {
    euler_factor_cached(e, place, &EulerCache::disabled())
}

/// As `euler_factor`, memoizing good-place traces through the cache.
pub fn euler_factor_cached(
    e: &WeierstrassCurve,
    place: &Place,
    cache: &EulerCache,
) -> Result<PlaceTerm> {
    let loc = curve::local_reduction(e, place)?;
    if loc.kodaira == Kodaira::Good {
        let fp = e.fingerprint();
        let label = place.label(e.field.as_ref());
        let trace = match cache.get(&fp, &label, 1) {
            Some(t) => t,
            None => {
                let t = curve::trace_from_local(e.field.clone(), &loc, 1)?;
                cache.insert(&fp, &label, 1, t)?;
                t
            }
        };
        return Ok(PlaceTerm {
            place: place.clone(),
            degree: place.degree,
            kind: LocalKind::Good { trace },
        });
    }
    place_term_from_local(e, &loc)
}

fn place_term_from_local(e: &WeierstrassCurve, loc: &LocalReduction) -> Result<PlaceTerm> {
    let kind = match loc.kodaira {
        Kodaira::Good => LocalKind::Good {
            trace: curve::trace_from_local(e.field.clone(), loc, 1)?,
        },
        Kodaira::Mult { split, .. } => LocalKind::Mult { split },
        Kodaira::Additive(_) => LocalKind::Additive,
    };
    Ok(PlaceTerm {
        place: loc.place.clone(),
        degree: loc.place.degree,
        kind,
    })
}

// ---------------------------------------------------------------------------
// Assembly context
// ---------------------------------------------------------------------------

/// Shared data for expanding Euler products of one curve.
pub struct LAssembly<'a> {
    pub curve: &'a WeierstrassCurve,
    pub reduction: GlobalReduction,
    pub inv: curve::CurveInvariants,
    pub fingerprint: String,
    bad: BTreeMap<Place, LocalReduction>,
}

impl<'a> LAssembly<'a> {
    pub fn new(e: &'a WeierstrassCurve) -> Result<LAssembly<'a>> {
        if e.field.p < 5 {
            return Err(Error::Unsupported("p < 5".into()));
        }
        if curve::is_isotrivial(e)? {
            return Err(Error::Domain("L-function requires a non-isotrivial curve".into()));
        }
        let reduction = curve::global_reduction(e)?;
        let inv = curve::invariants(e)?;
        let bad = reduction
            .locals
            .iter()
            .map(|l| (l.place.clone(), l.clone()))
            .collect();
        Ok(LAssembly {
            curve: e,
            reduction,
            inv,
            fingerprint: e.fingerprint(),
            bad,
        })
    }

    /// Degree of the (untwisted) L-polynomial: deg n - 4 (genus 0).
    pub fn l_degree(&self) -> Result<u32> {
        let delta = self.reduction.deg_conductor - 4;
        if delta < 0 {
            return Err(Error::Internal(format!(
                "conductor degree {} below 4 for a non-isotrivial curve",
                self.reduction.deg_conductor
            )));
        }
        Ok(delta as u32)
    }

    /// Every place of degree <= upto with its local Euler data; traces are
    /// point-counted in parallel and memoized through the cache.
    pub fn place_terms(&self, upto: u32, cache: &EulerCache) -> Result<Vec<PlaceTerm>> {
        let field = &self.curve.field;
        let mut terms: Vec<PlaceTerm> = Vec::new();
        // inspected places carry their own reduction data (includes infinity)
        for loc in &self.reduction.locals {
            if loc.place.degree > upto {
                continue;
            }
            let label = loc.place.label(field.as_ref());
            let term = match loc.kodaira {
                Kodaira::Good => {
                    let trace = match cache.get(&self.fingerprint, &label, 1) {
                        Some(t) => t,
                        None => {
                            let t = curve::trace_from_local(field.clone(), loc, 1)?;
                            cache.insert(&self.fingerprint, &label, 1, t)?;
                            t
                        }
                    };
                    LocalKind::Good { trace }
                }
                Kodaira::Mult { split, .. } => LocalKind::Mult { split },
                Kodaira::Additive(_) => LocalKind::Additive,
            };
            terms.push(PlaceTerm {
                place: loc.place.clone(),
                degree: loc.place.degree,
                kind: term,
            });
        }
        // everything else is good with the given model
        for e_deg in 1..=upto {
            let sites = places_of_degree(field, e_deg)?;
            let ext = &sites.ext;
            let emb = &sites.emb;
            // embedded coefficient vectors of c4, c6 numerators/denominators
            let ring = PolyRing::new(field.as_ref());
            let embed_poly = |p: &crate::funcfield::Poly| -> Vec<FieldElem> {
                p.coeffs.iter().map(|&c| emb.apply(c)).collect()
            };
            let c4n = embed_poly(&self.inv.c4.num);
            let c4d = embed_poly(&self.inv.c4.den);
            let c6n = embed_poly(&self.inv.c6.num);
            let c6d = embed_poly(&self.inv.c6.den);
            let _ = ring;
            let eval = |coeffs: &[FieldElem], x: FieldElem| -> FieldElem {
                let mut acc = 0;
                for &c in coeffs.iter().rev() {
                    acc = ext.add(ext.mul(acc, x), c);
                }
                acc
            };
            let todo: Vec<&crate::funcfield::PlaceSite> = sites
                .sites
                .iter()
                .filter(|s| !self.bad.contains_key(&s.place))
                .collect();
            let computed: Result<Vec<PlaceTerm>> = todo
                .par_iter()
                .map(|site| {
                    let label = site.place.label(field.as_ref());
                    let trace = match cache.get(&self.fingerprint, &label, 1) {
                        Some(t) => t,
                        None => {
                            let den4 = eval(&c4d, site.theta);
                            let den6 = eval(&c6d, site.theta);
                            if den4 == 0 || den6 == 0 {
                                return Err(Error::Internal(
                                    "unexpected pole at a good place".into(),
                                ));
                            }
                            let c4v = ext.mul(eval(&c4n, site.theta), ext.inv(den4)?);
                            let c6v = ext.mul(eval(&c6n, site.theta), ext.inv(den6)?);
                            let a_coef = ext.mul(ext.from_int(-27), c4v);
                            let b_coef = ext.mul(ext.from_int(-54), c6v);
                            let t = curve::short_weierstrass_trace(ext.as_ref(), a_coef, b_coef);
                            cache.insert(&self.fingerprint, &label, 1, t)?;
                            t
                        }
                    };
                    Ok(PlaceTerm {
                        place: site.place.clone(),
                        degree: e_deg,
                        kind: LocalKind::Good { trace },
                    })
                })
                .collect();
            terms.extend(computed?);
        }
        terms.sort_by(|a, b| a.place.cmp(&b.place));
        Ok(terms)
    }

    /// Integer coefficients b_0..b_upto of the Euler-product expansion.
    pub fn counted_coefficients(&self, upto: u32, cache: &EulerCache) -> Result<Vec<i128>> {
        let terms = self.place_terms(upto, cache)?;
        let q = self.curve.field.q;
        let mut b = vec![0i128; upto as usize + 1];
        b[0] = 1;
        for term in &terms {
            multiply_local_series_int(&mut b, term, q);
        }
        Ok(b)
    }
}

/// Multiply the running series by the inverse of the local denominator,
/// truncated at the series length. The inverse of 1 - aT + cT^2 obeys
/// s_j = a s_{j-1} - c s_{j-2}.
fn multiply_local_series_int(b: &mut [i128], term: &PlaceTerm, q: u64) {
    let e = term.degree as usize;
    let n = b.len();
    if e >= n {
        return;
    }
    let jmax = (n - 1) / e;
    let mut s: Vec<i128> = vec![0; jmax + 1];
    s[0] = 1;
    match term.kind {
        LocalKind::Additive => return,
        LocalKind::Mult { split } => {
            let a = if split { 1i128 } else { -1i128 };
            for j in 1..=jmax {
                s[j] = a * s[j - 1];
            }
        }
        LocalKind::Good { trace } => {
            let qe = (q as i128).pow(term.degree);
            for j in 1..=jmax {
                s[j] = trace as i128 * s[j - 1] - if j >= 2 { qe * s[j - 2] } else { 0 };
            }
        }
    }
    // b *= sum_j s_j t^(j e), in place (descending)
    for k in (0..n).rev() {
        let mut acc = b[k]; // j = 0 term
        let mut j = 1;
        while j * e <= k {
            acc += s[j] * b[k - j * e];
            j += 1;
        }
        b[k] = acc;
    }
}

// ---------------------------------------------------------------------------
// LPolynomial
// ---------------------------------------------------------------------------

/// Whether a coefficient came from point counts or from the functional
/// equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Counted,
    Completed,
}

/// An L-polynomial with exact coefficients, functional-equation sign, and
/// per-coefficient provenance.
#[derive(Debug, Clone)]
pub struct LPolynomial {
    pub p: u64,
    pub d: u32,
    pub degree: u32,
    pub coeffs: Coeffs,
    pub sign: Option<i8>,
    pub provenance: Vec<Provenance>,
}

impl LPolynomial {
    pub fn to_valued_poly(&self) -> ValuedPoly {
        ValuedPoly {
            p: self.p,
            d: self.d,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn int_coeffs(&self) -> Option<&[i128]> {
        match &self.coeffs {
            Coeffs::Int(v) => Some(v),
            Coeffs::Padic(_) => None,
        }
    }

    pub fn l_q(&self) -> Result<Rat> {
        crate::padic::l_q(&self.to_valued_poly())
    }

    /// Coefficient count sanity: constant term 1 and length degree + 1.
    fn validate(&self) -> Result<()> {
        let len = match &self.coeffs {
            Coeffs::Int(v) => v.len(),
            Coeffs::Padic(v) => v.len(),
        };
        if len != self.degree as usize + 1 {
            return Err(Error::Internal(format!(
                "L-polynomial length {len} does not match degree {}",
                self.degree
            )));
        }
        if let Coeffs::Int(v) = &self.coeffs {
            if v[0] != 1 {
                return Err(Error::Internal("constant term of L must be 1".into()));
            }
        }
        Ok(())
    }

    /// JSON view: degree, coefficients as decimal strings, sign, provenance,
    /// slopes and l_q.
    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<String> = match &self.coeffs {
            Coeffs::Int(v) => v.iter().map(|c| c.to_string()).collect(),
            Coeffs::Padic(v) => v
                .iter()
                .map(|c| {
                    if c.is_zero() {
                        "0".into()
                    } else {
                        let digits: Vec<String> =
                            c.unit.iter().map(|u| u.to_string()).collect();
                        format!("p^{}*[{}]", c.valuation, digits.join(","))
                    }
                })
                .collect(),
        };
        let np = crate::padic::newton_polygon(&self.to_valued_poly()).ok();
        let slopes: Vec<String> = np
            .as_ref()
            .map(|n| n.slope_multiset().iter().map(|s| s.to_string()).collect())
            .unwrap_or_default();
        let lq = np
            .as_ref()
            .map(|n| crate::padic::l_q_of_polygon(n).to_string())
            .unwrap_or_default();
        serde_json::json!({
            "degree": self.degree,
            "coefficients": coeffs,
            "sign": self.sign,
            "provenance": self.provenance.iter().map(|p| match p {
                Provenance::Counted => "counted",
                Provenance::Completed => "completed",
            }).collect::<Vec<_>>(),
            "slopes": slopes,
            "l_q": lq,
        })
    }
}

/// Computation mode for the Hasse-Weil L-polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LMode {
    /// Count every coefficient directly (the oracle).
    Full,
    /// Count through ceil(delta/2) and complete by the functional equation.
    Completed,
}

/// The Hasse-Weil L-polynomial of E.
///
/// `max_count_degree` caps the largest place degree that will be point
/// counted; exceeding it reports an error instead of silently working
/// (CLI gates slow runs behind --deep).
pub fn lfunction(
    e: &WeierstrassCurve,
    mode: LMode,
    cache: &EulerCache,
    max_count_degree: Option<u32>,
) -> Result<LPolynomial> {
    let asm = LAssembly::new(e)?;
    lfunction_with(&asm, mode, cache, max_count_degree)
}

pub fn lfunction_with(
    asm: &LAssembly,
    mode: LMode,
    cache: &EulerCache,
    max_count_degree: Option<u32>,
) -> Result<LPolynomial> {
    let delta = asm.l_degree()?;
    let q = asm.curve.field.q as i128;
    let guard = |h: u32| -> Result<()> {
        if let Some(limit) = max_count_degree {
            if h > limit {
                return Err(Error::Domain(format!(
                    "needs point counts at places of degree {h} > limit {limit} (rerun with --deep)"
                )));
            }
        }
        Ok(())
    };
    if delta == 0 {
        // expansion must still be checked: first two coefficients vanish
        guard(2.min(delta + 2))?;
        let b = asm.counted_coefficients(2, cache)?;
        if b[1] != 0 || b[2] != 0 {
            return Err(Error::TailNonvanishing(format!(
                "degree-0 L has nonzero tail: {b:?}"
            )));
        }
        let l = LPolynomial {
            p: asm.curve.field.p,
            d: asm.curve.field.k,
            degree: 0,
            coeffs: Coeffs::Int(vec![1]),
            sign: Some(1),
            provenance: vec![Provenance::Counted],
        };
        l.validate()?;
        return Ok(l);
    }
    match mode {
        LMode::Full => {
            guard(delta)?;
            let b = asm.counted_coefficients(delta, cache)?;
            // verify the functional equation rather than imposing it
            let bq = q.pow(delta);
            let w = if b[delta as usize] == bq {
                1i8
            } else if b[delta as usize] == -bq {
                -1i8
            } else {
                return Err(Error::Internal(format!(
                    "leading coefficient {} is not +-q^{delta}",
                    b[delta as usize]
                )));
            };
            for k in 0..=(delta as usize / 2) {
                let expect = w as i128 * q.pow(delta - 2 * k as u32) * b[k];
                if b[delta as usize - k] != expect {
                    return Err(Error::Internal(format!(
                        "functional equation fails at k = {k}: {} vs {expect}",
                        b[delta as usize - k]
                    )));
                }
            }
            let l = LPolynomial {
                p: asm.curve.field.p,
                d: asm.curve.field.k,
                degree: delta,
                coeffs: Coeffs::Int(b),
                sign: Some(w),
                provenance: vec![Provenance::Counted; delta as usize + 1],
            };
            l.validate()?;
            validate_weights(&l)?;
            Ok(l)
        }
        LMode::Completed => {
            let mut h = delta.div_ceil(2);
            loop {
                guard(h)?;
                let b = asm.counted_coefficients(h, cache)?;
                // try to pin the sign from an overlap pair (k, delta - k),
                // both counted, with b_k != 0 and k <= delta/2
                let mut sign: Option<i8> = None;
                for k in (delta.saturating_sub(h))..=(delta / 2) {
                    if delta - k > h || b[k as usize] == 0 {
                        continue;
                    }
                    let lhs = b[(delta - k) as usize];
                    let scale = q.pow(delta - 2 * k) * b[k as usize];
                    let w = if lhs == scale {
                        1i8
                    } else if lhs == -scale {
                        -1i8
                    } else {
                        return Err(Error::Internal(format!(
                            "functional equation fails on counted overlap at k = {k}"
                        )));
                    };
                    match sign {
                        None => sign = Some(w),
                        Some(old) if old != w => {
                            return Err(Error::Internal(
                                "inconsistent signs across overlap pairs".into(),
                            ))
                        }
                        _ => {}
                    }
                }
                let Some(w) = sign else {
                    // compute one extra coefficient and retry
                    if h >= delta {
                        return Err(Error::SignIndeterminable);
                    }
                    h += 1;
                    continue;
                };
                let mut coeffs = vec![0i128; delta as usize + 1];
                let mut provenance = vec![Provenance::Completed; delta as usize + 1];
                for k in 0..=h.min(delta) {
                    coeffs[k as usize] = b[k as usize];
                    provenance[k as usize] = Provenance::Counted;
                }
                for k in 0..=(delta / 2) {
                    if delta - k > h {
                        coeffs[(delta - k) as usize] =
                            w as i128 * q.pow(delta - 2 * k) * coeffs[k as usize];
                    }
                }
                let l = LPolynomial {
                    p: asm.curve.field.p,
                    d: asm.curve.field.k,
                    degree: delta,
                    coeffs: Coeffs::Int(coeffs),
                    sign: Some(w),
                    provenance,
                };
                l.validate()?;
                validate_weights(&l)?;
                return Ok(l);
            }
        }
    }
}

/// Newton polygon of an untwisted L must be symmetric about slope 1 with all
/// slopes in [0, 2].
fn validate_weights(l: &LPolynomial) -> Result<()> {
    let np = crate::padic::newton_polygon(&l.to_valued_poly())?;
    if !np.symmetric_about_one() {
        return Err(Error::Internal("Newton polygon not symmetric about 1".into()));
    }
    let two = Rat::from_integer(2);
    let zero = Rat::from_integer(0);
    for &(s, _) in &np.segments {
        if s < zero || s > two {
            return Err(Error::Internal(format!("slope {s} outside [0, 2]")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Twisted L-functions
// ---------------------------------------------------------------------------

/// The L-polynomial of E twisted by a tame character with conductor coprime
/// to the conductor of E, computed p-adically in W(F_q)/p^N.
///
/// The expansion runs to delta_alpha = deg n + 2 deg c - 4 and the next two
/// coefficients are verified to vanish.
pub fn twisted_lfunction(
    e: &WeierstrassCurve,
    alpha: &DirichletCharacter,
    nprec: u32,
    cache: &EulerCache,
    max_count_degree: Option<u32>,
) -> Result<LPolynomial> {
    let asm = LAssembly::new(e)?;
    twisted_lfunction_with(&asm, alpha, nprec, cache, max_count_degree)
}

pub fn twisted_lfunction_with(
    asm: &LAssembly,
    alpha: &DirichletCharacter,
    nprec: u32,
    cache: &EulerCache,
    max_count_degree: Option<u32>,
) -> Result<LPolynomial> {
    let field = &asm.curve.field;
    let cond = alpha.conductor_divisor();
    if !cond.coprime_to(&asm.reduction.conductor) {
        return Err(Error::ConductorMeetsBadPlaces);
    }
    let deg_c = alpha.conductor_degree();
    let delta_i = asm.reduction.deg_conductor + 2 * deg_c as i64 - 4;
    if delta_i < 0 {
        return Err(Error::Internal("negative twisted degree".into()));
    }
    let delta = delta_i as u32;
    let upto = delta + 2;
    // precision must dominate the archimedean size of every coefficient:
    // |b_k| <= 2^k q^(3k/2) conjugate-wise, so p^N > 2 * (2 q^2)^upto is a
    // comfortable integer-arithmetic bound
    let ring = PadicRing::new(field, nprec)?;
    let bound = BigUint::from(2u32)
        * (BigUint::from(2u32) * BigUint::from(field.q).pow(2)).pow(upto);
    if ring.pn <= bound {
        return Err(Error::PrecisionExhausted);
    }
    if let Some(limit) = max_count_degree {
        if upto > limit {
            return Err(Error::Domain(format!(
                "needs point counts at places of degree {upto} > limit {limit} (rerun with --deep)"
            )));
        }
    }
    let terms = asm.place_terms(upto, cache)?;
    let mut b: Vec<PadicScalar> = vec![ring.zero_elem(); upto as usize + 1];
    b[0] = ring.one_elem();
    for term in &terms {
        let value = alpha.alpha_at_place(&term.place)?;
        let unit = match value {
            CharValue::Zero => continue, // ramified: local factor 1
            CharValue::Unit(u) => u,
        };
        let alpha_lift = ring.teichmuller(unit)?;
        multiply_local_series_padic(&ring, &mut b, term, &alpha_lift, field.q)?;
    }
    // tail check
    for k in [delta + 1, delta + 2] {
        if !b[k as usize].is_zero() {
            return Err(Error::TailNonvanishing(format!(
                "twisted coefficient at degree {k} is nonzero: {}",
                ring.format_scalar(&b[k as usize])
            )));
        }
    }
    b.truncate(delta as usize + 1);
    if b[delta as usize].is_zero() {
        return Err(Error::Internal("twisted L has degree below the conductor formula".into()));
    }
    let l = LPolynomial {
        p: field.p,
        d: field.k,
        degree: delta,
        coeffs: Coeffs::Padic(b),
        sign: None,
        provenance: vec![Provenance::Counted; delta as usize + 1],
    };
    l.validate()?;
    Ok(l)
}

fn multiply_local_series_padic(
    ring: &PadicRing,
    b: &mut [PadicScalar],
    term: &PlaceTerm,
    alpha: &PadicScalar,
    q: u64,
) -> Result<()> {
    let e = term.degree as usize;
    let n = b.len();
    if e >= n {
        return Ok(());
    }
    let jmax = (n - 1) / e;
    let mut s: Vec<PadicScalar> = vec![ring.zero_elem(); jmax + 1];
    s[0] = ring.one_elem();
    match term.kind {
        LocalKind::Additive => return Ok(()),
        LocalKind::Mult { split } => {
            // 1/(1 - a alpha T): s_j = (a alpha)^j
            let a = if split { 1i128 } else { -1i128 };
            let step = ring.mul(&ring.from_i128(a), alpha);
            for j in 1..=jmax {
                s[j] = ring.mul(&s[j - 1], &step);
            }
        }
        LocalKind::Good { trace } => {
            // 1/(1 - a alpha T + alpha^2 q^e T^2):
            // s_j = a alpha s_{j-1} - q^e alpha^2 s_{j-2}
            let qe = BigUint::from(q).pow(term.degree);
            let lin = ring.mul(&ring.from_i128(trace as i128), alpha);
            let quad = ring.mul(&ring.from_biguint(&qe), &ring.mul(alpha, alpha));
            for j in 1..=jmax {
                let mut v = ring.mul(&lin, &s[j - 1]);
                if j >= 2 {
                    v = ring.sub(&v, &ring.mul(&quad, &s[j - 2]));
                }
                s[j] = v;
            }
        }
    }
    for k in (0..n).rev() {
        let mut acc = b[k].clone();
        let mut j = 1;
        while j * e <= k {
            acc = ring.add(&acc, &ring.mul(&s[j], &b[k - j * e]));
            j += 1;
        }
        b[k] = acc;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Epsilon, Fourier coefficients, G-factor, log-derivative check
// ---------------------------------------------------------------------------

/// The leading coefficient of an L-polynomial with its exact v_q.
#[derive(Debug, Clone)]
pub enum Epsilon {
    /// Integer case: epsilon = w q^degree.
    Int { sign: i8, val_q: Rat },
    /// p-adic case: leading unit and valuation.
    Padic { scalar: PadicScalar, val_q: Rat },
}

impl Epsilon {
    pub fn val_q(&self) -> Rat {
        match self {
            Epsilon::Int { val_q, .. } | Epsilon::Padic { val_q, .. } => *val_q,
        }
    }
}

/// Extract the epsilon constant (leading coefficient) of an L-polynomial.
pub fn epsilon_from_leading(l: &LPolynomial) -> Result<Epsilon> {
    match &l.coeffs {
        Coeffs::Int(v) => {
            let top = *v.last().ok_or(Error::ZeroPolynomial)?;
            if top == 0 {
                return Err(Error::Internal("zero leading coefficient".into()));
            }
            let q = (l.p as i128).pow(l.d);
            let expect = q.pow(l.degree);
            let sign = if top == expect {
                1
            } else if top == -expect {
                -1
            } else {
                return Err(Error::Internal("leading coefficient is not +-q^degree".into()));
            };
            Ok(Epsilon::Int {
                sign,
                val_q: Rat::from_integer(l.degree as i64),
            })
        }
        Coeffs::Padic(v) => {
            let top = v.last().ok_or(Error::ZeroPolynomial)?.clone();
            let vp = top.val_p().ok_or(Error::PrecisionExhausted)?;
            Ok(Epsilon::Padic {
                val_q: Rat::new(vp as i64, l.d as i64),
                scalar: top,
            })
        }
    }
}

/// The normalized Fourier coefficient a(m) of an effective divisor:
/// multiplicative with a(x^n) = c_n(x) / q^(n deg x), where the c_n expand
/// the inverse local factor. Non-effective divisors map to 0; a(1) = 1.
pub fn fourier_coefficient(
    e: &WeierstrassCurve,
    m: &Divisor,
    cache: &EulerCache,
) -> Result<BigRational> {
    if !m.is_effective() {
        return Ok(BigRational::zero());
    }
    let q = e.field.q;
    let mut acc = BigRational::one();
    for (place, &mult) in &m.coeffs {
        let term = euler_factor_cached(e, place, cache)?;
        let n = mult as usize;
        // c_n from the inverse local factor
        let mut s: Vec<i128> = vec![0; n + 1];
        s[0] = 1;
        match term.kind {
            LocalKind::Additive => {
                if n >= 1 {
                    return Ok(BigRational::zero());
                }
            }
            LocalKind::Mult { split } => {
                let a = if split { 1i128 } else { -1i128 };
                for j in 1..=n {
                    s[j] = a * s[j - 1];
                }
            }
            LocalKind::Good { trace } => {
                let qe = (q as i128).pow(term.degree);
                for j in 1..=n {
                    s[j] = trace as i128 * s[j - 1] - if j >= 2 { qe * s[j - 2] } else { 0 };
                }
            }
        }
        let num = BigInt::from(s[n]);
        let den = BigInt::from(q).pow(mult as u32 * term.degree);
        acc *= BigRational::new(num, den);
    }
    Ok(acc)
}

/// The G-factor: product over x in supp(c) minus supp(cond alpha) of
/// -1 + a(x) alpha(x) (q t)^deg x - alpha(x)^2 t^(2 deg x), with
/// a(x)(qt)^deg x = a_x t^deg x at good places.
pub fn g_factor(
    e: &WeierstrassCurve,
    alpha: &DirichletCharacter,
    c: &Divisor,
    nprec: u32,
) -> Result<Vec<PadicScalar>> {
    let reduction = curve::global_reduction(e)?;
    if !c.is_effective() || c.coeffs.values().any(|&m| m != 1) {
        return Err(Error::Domain("c must be squarefree and effective".into()));
    }
    if !c.coprime_to(&reduction.conductor) {
        return Err(Error::ConductorMeetsBadPlaces);
    }
    let cond = alpha.conductor_divisor();
    for place in cond.support() {
        if c.multiplicity(place) == 0 {
            return Err(Error::Domain("cond(alpha) must divide c".into()));
        }
    }
    let ring = PadicRing::new(&e.field, nprec)?;
    let mut out = vec![ring.one_elem()];
    for place in c.support() {
        if cond.multiplicity(place) != 0 {
            continue;
        }
        let term = euler_factor(e, place)?;
        let LocalKind::Good { trace } = term.kind else {
            return Err(Error::Internal("coprimality to the conductor forces good reduction".into()));
        };
        let value = match alpha.alpha_at_place(place)? {
            CharValue::Unit(u) => ring.teichmuller(u)?,
            CharValue::Zero => return Err(Error::Internal("unexpected ramified value".into())),
        };
        let e_deg = place.degree as usize;
        // -1 + a_x alpha(x) t^deg - alpha(x)^2 t^(2 deg)
        let mut factor = vec![ring.zero_elem(); 2 * e_deg + 1];
        factor[0] = ring.from_i128(-1);
        factor[e_deg] = ring.mul(&ring.from_i128(trace as i128), &value);
        factor[2 * e_deg] = {
            let sq = ring.mul(&value, &value);
            ring.sub(&ring.zero_elem(), &sq)
        };
        out = poly_mul_padic(&ring, &out, &factor);
    }
    Ok(out)
}

fn poly_mul_padic(ring: &PadicRing, a: &[PadicScalar], b: &[PadicScalar]) -> Vec<PadicScalar> {
    let mut out = vec![ring.zero_elem(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let t = ring.mul(x, y);
            out[i + j] = ring.add(&out[i + j], &t);
        }
    }
    out
}

/// Independent consistency oracle: compares the degree-k power sum extracted
/// from the assembled Euler data against a direct fiber enumeration over
/// P^1(F_{q^k}). Returns the difference, which must be zero.
pub fn log_derivative_check(e: &WeierstrassCurve, k: u32, cache: &EulerCache) -> Result<i128> {
    let asm = LAssembly::new(e)?;
    let field = &e.field;
    let q = field.q;
    // power sums from the assembled expansion: S_k = k b_k - sum S_i b_{k-i}
    let b = asm.counted_coefficients(k, cache)?;
    let mut s = vec![0i128; k as usize + 1];
    for i in 1..=(k as usize) {
        let mut acc = i as i128 * b[i];
        for j in 1..i {
            acc -= s[j] * b[i - j];
        }
        s[i] = acc;
    }
    let expected = s[k as usize];
    // direct enumeration with the raw global model
    let sites_field = ff::build_field(field.p, field.k * k)?;
    if !sites_field.has_tables() {
        return Err(Error::Unsupported("counting field exceeds the table limit".into()));
    }
    let emb = ff::embed(field, &sites_field)?;
    let inv = &asm.inv;
    let embed_poly = |p: &crate::funcfield::Poly| -> Vec<FieldElem> {
        p.coeffs.iter().map(|&c| emb.apply(c)).collect()
    };
    let c4n = embed_poly(&inv.c4.num);
    let c4d = embed_poly(&inv.c4.den);
    let c6n = embed_poly(&inv.c6.num);
    let c6d = embed_poly(&inv.c6.den);
    let dn = embed_poly(&inv.delta.num);
    let dd = embed_poly(&inv.delta.den);
    let ext = sites_field.as_ref();
    let eval = |coeffs: &[FieldElem], x: FieldElem| -> FieldElem {
        let mut acc = 0;
        for &c in coeffs.iter().rev() {
            acc = ext.add(ext.mul(acc, x), c);
        }
        acc
    };
    let mut direct: i128 = 0;
    for theta in 0..ext.q {
        let d4 = eval(&c4d, theta);
        let d6 = eval(&c6d, theta);
        let ddn = eval(&dn, theta);
        let ddd = eval(&dd, theta);
        if d4 == 0 || d6 == 0 || ddd == 0 || ddn == 0 {
            continue; // degenerate point: covered by local data below
        }
        let c4v = ext.mul(eval(&c4n, theta), ext.inv(d4)?);
        let c6v = ext.mul(eval(&c6n, theta), ext.inv(d6)?);
        let a_coef = ext.mul(ext.from_int(-27), c4v);
        let b_coef = ext.mul(ext.from_int(-54), c6v);
        direct += curve::short_weierstrass_trace(ext, a_coef, b_coef) as i128;
    }
    // inspected places of degree dividing k (always includes infinity)
    for loc in &asm.reduction.locals {
        let e_deg = loc.place.degree;
        if !k.is_multiple_of(e_deg) {
            continue;
        }
        let pow = k / e_deg;
        match loc.kodaira {
            Kodaira::Additive(_) => {}
            Kodaira::Mult { split, .. } => {
                let a = if split { 1i128 } else { -1i128 };
                direct += e_deg as i128 * a.pow(pow);
            }
            Kodaira::Good => {
                let a1 = curve::trace_from_local(field.clone(), loc, 1)? as i128;
                let qe = (q as i128).pow(e_deg);
                // t_j = a t_{j-1} - q^e t_{j-2}, t_0 = 2
                let (mut t0, mut t1) = (2i128, a1);
                for _ in 1..pow {
                    let t2 = a1 * t1 - qe * t0;
                    t0 = t1;
                    t1 = t2;
                }
                direct += e_deg as i128 * if pow == 0 { 2 } else { t1 };
            }
        }
    }
    Ok(direct - expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcfield::{parse_poly, Poly, RatFunc};
    use std::sync::Arc;

    fn ulmer(field: &Arc<ff::FieldTable>, n: u32) -> WeierstrassCurve {
        let mut tn = vec![0u64; n as usize + 1];
        tn[n as usize] = 1;
        let a6 = RatFunc::from_poly(PolyRing::new(field.as_ref()).neg(&Poly::from_coeffs(tn)));
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

    #[test]
    fn l_of_e6_full_matches_oracle() {
        let f = ff::build_field(7, 1).unwrap();
        let e = ulmer(&f, 6);
        let cache = EulerCache::in_memory();
        let l = lfunction(&e, LMode::Full, &cache, None).unwrap();
        // frozen by the independent fiber-count oracle
        assert_eq!(l.int_coeffs().unwrap(), &[1, -7, -49, 343]);
        assert_eq!(l.sign, Some(1));
        assert_eq!(l.degree, 3);
        assert_eq!(l.l_q().unwrap(), Rat::from_integer(0));
    }

    #[test]
    fn l_of_e6_completed_equals_full() {
        let f = ff::build_field(7, 1).unwrap();
        let e = ulmer(&f, 6);
        let cache = EulerCache::in_memory();
        let full = lfunction(&e, LMode::Full, &cache, None).unwrap();
        let comp = lfunction(&e, LMode::Completed, &cache, None).unwrap();
        assert_eq!(full.int_coeffs().unwrap(), comp.int_coeffs().unwrap());
        assert_eq!(full.sign, comp.sign);
        // completed mode counted through ceil(3/2) = 2
        assert_eq!(comp.provenance[2], Provenance::Counted);
        assert_eq!(comp.provenance[3], Provenance::Completed);
    }

    #[test]
    fn small_ulmer_l_values_frozen() {
        // frozen by the independent Python fiber-count oracle
        let cases: Vec<(u64, u32, Vec<i128>)> = vec![
            (7, 1, vec![1]),
            (7, 2, vec![1, 7]),
            (7, 3, vec![1, -14, 49]),
            (5, 1, vec![1]),
            (5, 2, vec![1, -5]),
            (5, 4, vec![1, 5, -25, -125]),
        ];
        for (p, n, want) in cases {
            let f = ff::build_field(p, 1).unwrap();
            let e = ulmer(&f, n);
            let cache = EulerCache::in_memory();
            let l = lfunction(&e, LMode::Full, &cache, None).unwrap();
            assert_eq!(l.int_coeffs().unwrap(), &want[..], "E{n}/F{p}");
        }
    }

    #[test]
    fn log_derivative_zero_residual() {
        let f = ff::build_field(7, 1).unwrap();
        let e = ulmer(&f, 6);
        let cache = EulerCache::in_memory();
        for k in 1..=3 {
            assert_eq!(log_derivative_check(&e, k, &cache).unwrap(), 0, "k = {k}");
        }
        let f5 = ff::build_field(5, 1).unwrap();
        let e2 = ulmer(&f5, 2);
        assert_eq!(log_derivative_check(&e2, 1, &cache).unwrap(), 0);
        assert_eq!(log_derivative_check(&e2, 2, &cache).unwrap(), 0);
    }

    #[test]
    fn corrupted_cache_detected() {
        let f = ff::build_field(7, 1).unwrap();
        let e = ulmer(&f, 6);
        let cache = EulerCache::in_memory();
        let _ = lfunction(&e, LMode::Full, &cache, None).unwrap();
        // poison one entry: recomputation through the check must notice
        let fp = e.fingerprint();
        let place = Place::finite(parse_poly(f.as_ref(), "T-1").unwrap());
        let label = place.label(f.as_ref());
        let good = cache.get(&fp, &label, 1).unwrap();
        {
            let mut m = cache.map.lock().unwrap();
            m.insert((fp.clone(), label.clone(), 1), good + 1);
        }
        let res = log_derivative_check(&e, 1, &cache).unwrap();
        assert_ne!(res, 0, "perturbed cache must surface a nonzero residual");
        // and conflicting re-insertion is rejected
        assert!(cache.insert(&fp, &label, 1, good).is_err());
    }

    #[test]
    fn cache_transparency() {
        let f = ff::build_field(5, 1).unwrap();
        let e = ulmer(&f, 4);
        let cold = EulerCache::in_memory();
        let l1 = lfunction(&e, LMode::Full, &cold, None).unwrap();
        let l2 = lfunction(&e, LMode::Full, &cold, None).unwrap(); // warm
        let l3 = lfunction(&e, LMode::Full, &EulerCache::disabled(), None).unwrap();
        assert_eq!(l1.int_coeffs(), l2.int_coeffs());
        assert_eq!(l1.int_coeffs(), l3.int_coeffs());
        assert!(!cold.is_empty());
    }

    #[test]
    fn cache_file_round_trip() {
        let f = ff::build_field(5, 1).unwrap();
        let e = ulmer(&f, 2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traces.cache");
        let c1 = {
            let mut c = EulerCache::in_memory();
            c.path = Some(path.clone());
            c
        };
        let l1 = lfunction(&e, LMode::Full, &c1, None).unwrap();
        c1.save(5, 1).unwrap();
        let c2 = EulerCache::load(&path, 5, 1).unwrap();
        assert_eq!(c1.len(), c2.len());
        let l2 = lfunction(&e, LMode::Full, &c2, None).unwrap();
        assert_eq!(l1.int_coeffs(), l2.int_coeffs());
        assert!(EulerCache::load(&path, 7, 1).is_err());
    }

    #[test]
    fn fourier_coefficients() {
        let f = ff::build_field(7, 1).unwrap();
        let e = ulmer(&f, 6);
        let cache = EulerCache::in_memory();
        // a(1) = 1
        let one = Divisor::new();
        assert_eq!(
            fourier_coefficient(&e, &one, &cache).unwrap(),
            BigRational::one()
        );
        // split multiplicative degree-1 place (T): a(x) = 1/q
        let mut m = Divisor::new();
        m.add_place(Place::finite(Poly::t()), 1);
        assert_eq!(
            fourier_coefficient(&e, &m, &cache).unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(7))
        );
        // non-effective -> 0
        let mut neg = Divisor::new();
        neg.add_place(Place::finite(Poly::t()), -1);
        assert!(fourier_coefficient(&e, &neg, &cache).unwrap().is_zero());
        // Weil bound: |a(m)| <= d(m) q^(-deg(m)/2), i.e. a(m)^2 q^deg <= d(m)^2,
        // with d(m) the divisor count. Checked as exact rationals.
        for (s, mult) in [("T-1", 1i64), ("T-2", 1), ("T^2+1", 1), ("T^2+T+3", 1), ("T-3", 2)] {
            let mut m = Divisor::new();
            let poly = parse_poly(f.as_ref(), s).unwrap();
            let deg = mult * poly.degree();
            m.add_place(Place::finite(poly), mult);
            let a = fourier_coefficient(&e, &m, &cache).unwrap();
            let qdeg = BigRational::from_integer(BigInt::from(7).pow(deg as u32));
            let dcount = BigRational::from_integer(BigInt::from(mult + 1));
            assert!(
                &a * &a * &qdeg <= &dcount * &dcount,
                "Weil bound fails for {s}^{mult}: a = {a}"
            );
        }
    }

    #[test]
    fn l_q_bound_thm_upper() {
        // l_q(L) <= deg Delta / 12 - 1 on the small corpus
        for (p, n) in [(7u64, 6u32), (7, 3), (5, 2), (5, 4)] {
            let f = ff::build_field(p, 1).unwrap();
            let e = ulmer(&f, n);
            let cache = EulerCache::in_memory();
            let l = lfunction(&e, LMode::Full, &cache, None).unwrap();
            let g = curve::global_reduction(&e).unwrap();
            let bound = Rat::new(g.deg_delta, 12) - Rat::from_integer(1);
            assert!(l.l_q().unwrap() <= bound, "E{n}/F{p}");
        }
    }

    #[test]
    fn twisted_by_trivial_like_and_quadratic_twist() {
        // quadratic alpha <-> the quadratic twist curve: both point-counted
        let f = ff::build_field(5, 1).unwrap();
        let cache = EulerCache::in_memory();
        for (n, c_str) in [(1u32, "T^2+2"), (2, "T^2+3"), (1, "T^2+T+1")] {
            let e = ulmer(&f, n);
            let c = parse_poly(f.as_ref(), c_str).unwrap();
            let alpha = crate::funcfield::DirichletCharacter::new(&f, &c, 2, &[1], 0).unwrap();
            let tw = twisted_lfunction(&e, &alpha, 32, &cache, None).unwrap();
            // quadratic twist of the curve by c itself
            let ctw = curve::quadratic_twist(&e, &RatFunc::from_poly(c.clone())).unwrap();
            let l2 = lfunction(&ctw, LMode::Full, &cache, None).unwrap();
            assert_eq!(tw.degree, l2.degree, "degrees for twist by {c_str}");
            // compare coefficients mod p^N
            let ring = PadicRing::new(&f, 32).unwrap();
            let Coeffs::Padic(pv) = &tw.coeffs else { panic!() };
            let ints = l2.int_coeffs().unwrap();
            for (k, (a, b)) in pv.iter().zip(ints.iter()).enumerate() {
                let bi = ring.from_i128(*b);
                assert_eq!(a, &bi, "coefficient {k} for twist by {c_str}");
            }
        }
    }

    #[test]
    fn twisted_degree_formula_and_tail() {
        // delta_alpha = deg n + 2 deg c - 4, checked through the vanishing tail
        let f = ff::build_field(5, 1).unwrap();
        let cache = EulerCache::in_memory();
        let e = ulmer(&f, 2); // deg n = 5
        let c = parse_poly(f.as_ref(), "T^2+3").unwrap();
        let alpha = crate::funcfield::DirichletCharacter::new(&f, &c, 2, &[1], 0).unwrap();
        let tw = twisted_lfunction(&e, &alpha, 32, &cache, None).unwrap();
        assert_eq!(tw.degree, 5);
        // conductor meeting the bad places is rejected: T^2+2 divides 1-432T^2
        let bad_c = parse_poly(f.as_ref(), "T^2+2").unwrap();
        let g = curve::global_reduction(&e).unwrap();
        let overlaps = g
            .conductor
            .support()
            .any(|pl| pl.monic_poly() == Some(&bad_c));
        if overlaps {
            let alpha_bad =
                crate::funcfield::DirichletCharacter::new(&f, &bad_c, 2, &[1], 0).unwrap();
            assert!(matches!(
                twisted_lfunction(&e, &alpha_bad, 32, &cache, None),
                Err(Error::ConductorMeetsBadPlaces)
            ));
        }
    }

    #[test]
    fn twisted_l_q_independent_of_z() {
        // the unramified-twist slot rotates coefficients by roots of unity and
        // cannot move any Newton slope
        let f = ff::build_field(5, 1).unwrap();
        let cache = EulerCache::in_memory();
        let e = ulmer(&f, 2);
        let c = parse_poly(f.as_ref(), "T^2+3").unwrap();
        let base = crate::funcfield::DirichletCharacter::new(&f, &c, 2, &[1], 0).unwrap();
        let l0 = twisted_lfunction(&e, &base, 32, &cache, None).unwrap();
        for zk in [1u64, 2, 3] {
            let twisted_char =
                crate::funcfield::DirichletCharacter::new(&f, &c, 2, &[1], zk).unwrap();
            let l = twisted_lfunction(&e, &twisted_char, 32, &cache, None).unwrap();
            assert_eq!(l.l_q().unwrap(), l0.l_q().unwrap(), "z = g^{zk}");
        }
    }

    #[test]
    fn g_factor_shapes() {
        let f = ff::build_field(5, 1).unwrap();
        let e = ulmer(&f, 2);
        let c_poly = parse_poly(f.as_ref(), "T^2+3").unwrap();
        let alpha = crate::funcfield::DirichletCharacter::new(&f, &c_poly, 2, &[1], 0).unwrap();
        // c = cond(alpha): empty product = 1
        let c = alpha.conductor_divisor();
        let gf = g_factor(&e, &alpha, &c, 24).unwrap();
        assert_eq!(gf.len(), 1);
        let ring = PadicRing::new(&f, 24).unwrap();
        assert_eq!(gf[0], ring.one_elem());
        // one extra good place: a single quadratic factor of degree 2 deg x
        let mut c2 = c.clone();
        let extra = parse_poly(f.as_ref(), "T-1").unwrap();
        c2.add_place(Place::finite(extra), 1);
        let gf2 = g_factor(&e, &alpha, &c2, 24).unwrap();
        assert_eq!(gf2.len(), 3);
        // constant term -1, and min over sampled roots of unity of
        // v_q(G(eps)) = 0: the constant term alone is a unit, and every
        // coefficient is integral, so each evaluation at a unit eps has
        // v_q >= 0 with equality generically; check v_q of the constant
        assert_eq!(gf2[0], ring.from_i128(-1));
    }

    #[test]
    fn min_valuation_of_l_poly_cross_checked() {
        // min over roots of unity of v_q(L(eps/q)) = v_q(a) - k - l_q(L),
        // both sides computed independently (closed form vs sampling)
        let f = ff::build_field(7, 1).unwrap();
        let e = ulmer(&f, 6);
        let cache = EulerCache::in_memory();
        let l = lfunction(&e, LMode::Full, &cache, None).unwrap();
        let vp = l.to_valued_poly();
        let report = crate::padic::verify_min_valuation(&vp, 32).unwrap();
        assert_eq!(report.formula, -l.l_q().unwrap());
        assert!(report.attained_at.is_some());
    }

    #[test]
    fn epsilon_of_e6() {
        let f = ff::build_field(7, 1).unwrap();
        let e = ulmer(&f, 6);
        let cache = EulerCache::in_memory();
        let l = lfunction(&e, LMode::Full, &cache, None).unwrap();
        let eps = epsilon_from_leading(&l).unwrap();
        assert_eq!(eps.val_q(), Rat::from_integer(3));
        match eps {
            Epsilon::Int { sign, .. } => assert_eq!(sign, 1),
            _ => panic!("integer epsilon expected"),
        }
    }
}
