//! Finite-field tower arithmetic `F_{p^k}` (p >= 5), character tables, and
//! Teichmüller lifts into truncated unramified p-adic rings.
//!
//! Elements are polynomial-basis coefficient vectors packed into a single
//! `u64` code in base p, so the code range is exactly `0..p^k` and log /
//! antilog / Zech tables can be indexed densely. Tables are built when
//! `p^k <= 2^22`; larger fields fall back to schoolbook arithmetic on the
//! unpacked digits.

use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest field size for which log/antilog/Zech tables are built.
pub const TABLE_LIMIT: u64 = 1 << 22;

/// A field element, stored as its packed base-p code.
pub type FieldElem = u64;

/// Deterministic Miller-Rabin for u64 (full witness set).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod_u64(r, b, m);
        }
        b = mulmod_u64(b, b, m);
        e >>= 1;
    }
    r
}

fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mulmod_u64(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Factor a u64 into (prime, multiplicity) pairs, ascending.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut stack = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        while n.is_multiple_of(p) {
            primes.push(p);
            n /= p;
        }
    }
    if n > 1 {
        stack.push(n);
    }
    while let Some(m) = stack.pop() {
        if is_prime_u64(m) {
            primes.push(m);
        } else {
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Zech sentinel: index used when `1 + g^i = 0`.
const ZECH_ZERO: u32 = u32::MAX;

/// Arithmetic tables for one finite field `F_{p^k}`.
///
/// Immutable after construction; all operations are pure and safe to share
/// across threads.
pub struct FieldTable {
    pub p: u64,
    pub k: u32,
    /// Field size p^k.
    pub q: u64,
    /// Monic irreducible defining polynomial, coefficients mod p,
    /// length k+1, chosen lexicographically smallest (constant digit first).
    pub defining: Vec<u64>,
    /// A fixed multiplicative generator (packed code).
    pub generator: FieldElem,
    /// Factorization of q - 1.
    pub order_factors: Vec<(u64, u32)>,
    /// log[code] = i with g^i = code (log[0] unused), present iff q <= TABLE_LIMIT.
    log: Option<Vec<u32>>,
    /// antilog[i] = code of g^i for i in 0..q-1.
    antilog: Option<Vec<u32>>,
    /// zech[i] = log(1 + g^i), ZECH_ZERO when 1 + g^i = 0.
    zech: Option<Vec<u32>>,
    /// Powers of p for digit packing: p^0..p^k.
    ppow: Vec<u64>,
}

impl std::fmt::Debug for FieldTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FieldTable(p={}, k={}, q={})", self.p, self.k, self.q)
    }
}

/// Build the field `F_{p^k}` with a deterministically chosen defining
/// polynomial (lexicographically smallest monic irreducible) and generator
/// (smallest code of full multiplicative order).
pub fn build_field(p: u64, k: u32) -> Result<Arc<FieldTable>> {
    if !is_prime_u64(p) {
        return Err(Error::Unsupported(format!("{p} is not prime")));
    }
    if p < 5 {
        return Err(Error::Unsupported(format!("characteristic {p} < 5")));
    }
    if k == 0 {
        return Err(Error::Domain("extension degree k = 0".into()));
    }
    cached_field(p, k)
}

type FieldCache = Mutex<HashMap<(u64, u32), Arc<FieldTable>>>;

fn field_cache() -> &'static FieldCache {
    static CACHE: OnceLock<FieldCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached_field(p: u64, k: u32) -> Result<Arc<FieldTable>> {
    if let Some(t) = field_cache().lock().unwrap().get(&(p, k)) {
        return Ok(t.clone());
    }
    let t = Arc::new(FieldTable::build_uncached(p, k)?);
    field_cache()
        .lock()
        .unwrap()
        .entry((p, k))
        .or_insert_with(|| t.clone());
    Ok(t)
}

impl FieldTable {
    fn build_uncached(p: u64, k: u32) -> Result<FieldTable> {
        // p^k must fit into u64 codes with headroom for digit arithmetic.
        let mut q: u64 = 1;
        for _ in 0..k {
            q = q
                .checked_mul(p)
                .ok_or_else(|| Error::Unsupported(format!("p^k overflows u64 (p={p}, k={k})")))?;
        }
        let mut ppow = Vec::with_capacity(k as usize + 1);
        let mut acc = 1u64;
        for _ in 0..=k {
            ppow.push(acc);
            acc = acc.saturating_mul(p);
        }
        let defining = smallest_irreducible(p, k);
        let order_factors = factor_u64(q - 1);
        let mut table = FieldTable {
            p,
            k,
            q,
            defining,
            generator: 0,
            order_factors,
            log: None,
            antilog: None,
            zech: None,
            ppow,
        };
        table.generator = table.find_generator();
        if q <= TABLE_LIMIT {
            table.build_tables();
        }
        Ok(table)
    }

    #[inline]
    pub fn zero(&self) -> FieldElem {
        0
    }

    #[inline]
    pub fn one(&self) -> FieldElem {
        1
    }

    /// Constant from an integer (reduced mod p).
    #[inline]
    pub fn from_int(&self, n: i64) -> FieldElem {
        n.rem_euclid(self.p as i64) as u64
    }

    fn unpack(&self, code: FieldElem) -> Vec<u64> {
        let mut digits = vec![0u64; self.k as usize];
        let mut c = code;
        for d in digits.iter_mut() {
            *d = c % self.p;
            c /= self.p;
        }
        digits
    }

    fn pack(&self, digits: &[u64]) -> FieldElem {
        let mut code = 0u64;
        for (i, &d) in digits.iter().enumerate().take(self.k as usize) {
            code += d % self.p * self.ppow[i];
        }
        code
    }

    /// Coefficient vector (length k, constant term first).
    pub fn coeffs(&self, code: FieldElem) -> Vec<u64> {
        self.unpack(code)
    }

    pub fn from_coeffs(&self, digits: &[u64]) -> FieldElem {
        self.pack(digits)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        // digit-wise addition mod p without carries between digits
        let mut r = 0u64;
        let mut x = a;
        let mut y = b;
        for i in 0..self.k as usize {
            let s = (x % self.p + y % self.p) % self.p;
            r += s * self.ppow[i];
            x /= self.p;
            y /= self.p;
        }
        r
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let mut r = 0u64;
        let mut x = a;
        for i in 0..self.k as usize {
            let d = x % self.p;
            if d != 0 {
                r += (self.p - d) * self.ppow[i];
            }
            x /= self.p;
        }
        r
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a == 0 || b == 0 {
            return 0;
        }
        if let (Some(log), Some(antilog)) = (&self.log, &self.antilog) {
            let la = log[a as usize] as u64;
            let lb = log[b as usize] as u64;
            let mut s = la + lb;
            if s >= self.q - 1 {
                s -= self.q - 1;
            }
            return antilog[s as usize] as u64;
        }
        self.mul_schoolbook(a, b)
    }

    fn mul_schoolbook(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let da = self.unpack(a);
        let db = self.unpack(b);
        let k = self.k as usize;
        let mut prod = vec![0u128; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] += (x as u128) * (y as u128);
            }
        }
        let mut red: Vec<u64> = prod.iter().map(|&v| (v % self.p as u128) as u64).collect();
        // reduce degrees >= k using the monic defining polynomial
        for i in (k..red.len()).rev() {
            let c = red[i];
            if c != 0 {
                for j in 0..k {
                    let sub = mulmod_u64(c, self.defining[j], self.p);
                    red[i - k + j] = (red[i - k + j] + self.p - sub) % self.p;
                }
            }
        }
        red.truncate(k);
        self.pack(&red)
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        if let (Some(log), Some(antilog)) = (&self.log, &self.antilog) {
            let la = log[a as usize] as u128;
            let s = (la * (e as u128 % (self.q as u128 - 1))) % (self.q as u128 - 1);
            return antilog[s as usize] as u64;
        }
        let mut r = 1;
        let mut b = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a == 0 {
            return Err(Error::Domain("inverse of zero".into()));
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// x -> x^p, the absolute Frobenius.
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.pow(a, self.p)
    }

    /// Discrete log to the fixed generator; None for zero.
    pub fn dlog(&self, a: FieldElem) -> Option<u64> {
        if a == 0 {
            return None;
        }
        if let Some(log) = &self.log {
            return Some(log[a as usize] as u64);
        }
        // no-table fields: baby-step giant-step would be needed; the crate
        // never requires discrete logs outside table range
        None
    }

    pub fn antilog_elem(&self, i: u64) -> FieldElem {
        if let Some(antilog) = &self.antilog {
            antilog[(i % (self.q - 1)) as usize] as u64
        } else {
            self.pow(self.generator, i)
        }
    }

    /// Sum of two elements given by their logs, as a log (Zech lookup).
    /// Returns None when the sum is zero.
    #[inline]
    pub fn zech_add(&self, la: u32, lb: u32) -> Option<u32> {
        let zech = self.zech.as_ref().expect("zech tables required");
        let qm1 = (self.q - 1) as u32;
        let (lo, hi) = if la <= lb { (la, lb) } else { (lb, la) };
        let mut diff = hi - lo;
        if diff == 0 {
            // a + a = 2a: log = la + log(2)
            let l2 = self.log.as_ref().unwrap()[2usize];
            let mut s = la + l2;
            if s >= qm1 {
                s -= qm1;
            }
            return Some(s);
        }
        if diff >= qm1 {
            diff -= qm1;
        }
        let z = zech[diff as usize];
        if z == ZECH_ZERO {
            return None;
        }
        let mut s = lo + z;
        if s >= qm1 {
            s -= qm1;
        }
        Some(s)
    }

    pub fn has_tables(&self) -> bool {
        self.log.is_some()
    }

    pub fn log_table(&self) -> Option<&[u32]> {
        self.log.as_deref()
    }

    pub fn antilog_table(&self) -> Option<&[u32]> {
        self.antilog.as_deref()
    }

    pub fn zech_table(&self) -> Option<&[u32]> {
        self.zech.as_deref()
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: FieldElem) -> u64 {
        assert!(a != 0);
        let mut ord = self.q - 1;
        for &(l, _) in &self.order_factors {
            while ord.is_multiple_of(l) && self.pow(a, ord / l) == 1 {
                ord /= l;
            }
        }
        ord
    }

    fn find_generator(&self) -> FieldElem {
        'cand: for c in 2..self.q {
            for &(l, _) in &self.order_factors {
                if self.pow(c, (self.q - 1) / l) == 1 {
                    continue 'cand;
                }
            }
            return c;
        }
        unreachable!("every finite field has a generator")
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        let mut log = vec![0u32; q];
        let mut antilog = vec![0u32; q - 1];
        let mut x: FieldElem = 1;
        for (i, slot) in antilog.iter_mut().enumerate() {
            *slot = x as u32;
            log[x as usize] = i as u32;
            x = self.mul_schoolbook(x, self.generator);
        }
        debug_assert_eq!(x, 1, "generator order mismatch");
        // Zech: z[i] = log(1 + g^i); adding one only touches the lowest digit.
        let mut zech = vec![0u32; q - 1];
        for i in 0..(q - 1) {
            let c = antilog[i] as u64;
            let d0 = c % self.p;
            let cp1 = if d0 + 1 == self.p { c - d0 } else { c + 1 };
            zech[i] = if cp1 == 0 { ZECH_ZERO } else { log[cp1 as usize] };
        }
        self.log = Some(log);
        self.antilog = Some(antilog);
        self.zech = Some(zech);
    }

    /// Quadratic character: 0 for zero, else x^((q-1)/2) read as +-1.
    pub fn quadratic_character(&self, x: FieldElem) -> i32 {
        if x == 0 {
            return 0;
        }
        if let Some(log) = &self.log {
            return if log[x as usize] % 2 == 0 { 1 } else { -1 };
        }
        if self.pow(x, (self.q - 1) / 2) == 1 {
            1
        } else {
            -1
        }
    }

    /// Absolute trace down to F_p, as an integer in 0..p.
    pub fn trace_to_prime(&self, x: FieldElem) -> u64 {
        let mut acc = 0;
        let mut y = x;
        for _ in 0..self.k {
            acc = self.add(acc, y);
            y = self.frobenius(y);
        }
        debug_assert!(acc < self.p, "trace must land in the prime field");
        acc
    }
}

/// Lexicographically smallest monic irreducible of degree k over F_p
/// (candidates ordered by their packed base-p code).
fn smallest_irreducible(p: u64, k: u32) -> Vec<u64> {
    if k == 1 {
        return vec![0, 1]; // x itself: F_p with trivial reduction
    }
    let mut ppow_k = 1u64;
    for _ in 0..k {
        ppow_k *= p;
    }
    for code in 0..ppow_k {
        let mut poly: Vec<u64> = Vec::with_capacity(k as usize + 1);
        let mut c = code;
        for _ in 0..k {
            poly.push(c % p);
            c /= p;
        }
        poly.push(1);
        if poly_is_irreducible(p, &poly) {
            return poly;
        }
    }
    unreachable!("irreducibles of every degree exist")
}

/// Irreducibility over F_p: x^(p^k) = x mod f and x^(p^(k/l)) != x for primes l | k.
fn poly_is_irreducible(p: u64, f: &[u64]) -> bool {
    let k = (f.len() - 1) as u32;
    if k == 0 {
        return false;
    }
    if f[0] == 0 && k > 1 {
        return false; // divisible by x
    }
    let xq = |e: u32| -> Vec<u64> {
        // x^(p^e) mod f by repeated p-th powering
        let mut cur = vec![0u64, 1]; // x
        for _ in 0..e {
            cur = prime_poly_powmod(p, &cur, p, f);
        }
        cur
    };
    let x = vec![0u64, 1];
    if prime_poly_normalize(p, &xq(k)) != prime_poly_normalize(p, &x) {
        return false;
    }
    let mut kk = k;
    let mut prime_divs = Vec::new();
    let mut d = 2;
    while d * d <= kk {
        if kk.is_multiple_of(d) {
            prime_divs.push(d);
            while kk.is_multiple_of(d) {
                kk /= d;
            }
        }
        d += 1;
    }
    if kk > 1 {
        prime_divs.push(kk);
    }
    for l in prime_divs {
        let g = prime_poly_sub(p, &xq(k / l), &x);
        if prime_poly_gcd(p, &g, f).len() > 1 {
            return false;
        }
    }
    true
}

// --- tiny F_p[x] helpers used only during field construction ---

fn prime_poly_normalize(_p: u64, a: &[u64]) -> Vec<u64> {
    let mut v = a.to_vec();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn prime_poly_sub(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut r = vec![0u64; n];
    for (i, slot) in r.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *slot = (x + p - y) % p;
    }
    prime_poly_normalize(p, &r)
}

fn prime_poly_mulmod(p: u64, a: &[u64], b: &[u64], m: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            r[i + j] += x as u128 * y as u128;
        }
    }
    let mut r: Vec<u64> = r.iter().map(|&v| (v % p as u128) as u64).collect();
    let deg_m = m.len() - 1;
    // m is monic
    while r.len() > deg_m {
        let c = *r.last().unwrap();
        let top = r.len() - 1;
        if c != 0 {
            for j in 0..deg_m {
                let s = mulmod_u64(c, m[j], p);
                r[top - deg_m + j] = (r[top - deg_m + j] + p - s) % p;
            }
        }
        r.pop();
        while r.last() == Some(&0) && r.len() > deg_m {
            r.pop();
        }
    }
    prime_poly_normalize(p, &r)
}

fn prime_poly_powmod(p: u64, a: &[u64], mut e: u64, m: &[u64]) -> Vec<u64> {
    let mut base = a.to_vec();
    let mut r = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            r = prime_poly_mulmod(p, &r, &base, m);
        }
        base = prime_poly_mulmod(p, &base, &base, m);
        e >>= 1;
    }
    r
}

fn prime_poly_gcd(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut a = prime_poly_normalize(p, a);
    let mut b = prime_poly_normalize(p, b);
    while !b.is_empty() {
        let r = prime_poly_rem(p, &a, &b);
        a = b;
        b = r;
    }
    a
}

fn prime_poly_rem(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = powmod_u64(b[db], p - 2, p);
    while r.len() > db {
        let c = mulmod_u64(*r.last().unwrap(), lead_inv, p);
        let top = r.len() - 1;
        if c != 0 {
            for j in 0..=db {
                let s = mulmod_u64(c, b[j], p);
                r[top - db + j] = (r[top - db + j] + p - s) % p;
            }
        }
        r.pop();
        while r.last() == Some(&0) && !r.is_empty() {
            r.pop();
        }
    }
    prime_poly_normalize(p, &r)
}

/// An embedding of one field table into another (k1 | k2), represented by the
/// image of the class of x under source.defining.
#[derive(Debug, Clone)]
pub struct FieldEmbedding {
    pub source: Arc<FieldTable>,
    pub target: Arc<FieldTable>,
    pub image_of_x: FieldElem,
    /// Full image table source code -> target code when the source is small.
    map: Option<Vec<FieldElem>>,
}

impl FieldEmbedding {
    pub fn apply(&self, a: FieldElem) -> FieldElem {
        if let Some(m) = &self.map {
            return m[a as usize];
        }
        self.eval(a)
    }

    fn eval(&self, a: FieldElem) -> FieldElem {
        // Horner evaluation of the coefficient vector at image_of_x
        let digits = self.source.coeffs(a);
        let mut acc = self.target.zero();
        for &d in digits.iter().rev() {
            acc = self.target.mul(acc, self.image_of_x);
            acc = self.target.add(acc, d % self.target.p);
        }
        acc
    }
}

/// Find the ring homomorphism F_{p^k1} -> F_{p^k2} by locating a root of the
/// source defining polynomial inside the subfield of matching order.
pub fn embed(source: &Arc<FieldTable>, target: &Arc<FieldTable>) -> Result<FieldEmbedding> {
    if source.p != target.p {
        return Err(Error::Domain("embedding requires equal characteristic".into()));
    }
    if !target.k.is_multiple_of(source.k) {
        return Err(Error::Domain(format!(
            "no embedding: {} does not divide {}",
            source.k, target.k
        )));
    }
    let image_of_x = if source.k == 1 {
        // prime field: constants map to constants; the class of x in the
        // source is the residue of x mod (x) = 0
        0
    } else if source.defining == target.defining {
        // identity embedding
        target.from_coeffs(&{
            let mut v = vec![0u64; target.k as usize];
            v[1] = 1;
            v
        })
    } else {
        // roots of the source polynomial lie in the subfield of order p^k1;
        // its elements are z^(j*(q2-1)/(q1-1)) together with 0
        let step = (target.q - 1) / (source.q - 1);
        let mut found = None;
        for j in 0..(source.q - 1) {
            let z = target.antilog_elem(j * step);
            if eval_prime_poly(target, &source.defining, z) == 0 {
                found = Some(z);
                break;
            }
        }
        found.ok_or_else(|| Error::Internal("no root of defining polynomial found".into()))?
    };
    let map = if source.q <= 1 << 16 {
        let emb = FieldEmbedding {
            source: source.clone(),
            target: target.clone(),
            image_of_x,
            map: None,
        };
        let mut m = vec![0u64; source.q as usize];
        for (a, slot) in m.iter_mut().enumerate() {
            *slot = emb.eval(a as u64);
        }
        Some(m)
    } else {
        None
    };
    Ok(FieldEmbedding {
        source: source.clone(),
        target: target.clone(),
        image_of_x,
        map,
    })
}

fn eval_prime_poly(f: &FieldTable, poly: &[u64], z: FieldElem) -> FieldElem {
    let mut acc = f.zero();
    for &c in poly.iter().rev() {
        acc = f.mul(acc, z);
        acc = f.add(acc, c % f.p);
    }
    acc
}

// ---------------------------------------------------------------------------
// Truncated unramified p-adic rings W(F_{p^e})/p^N and Teichmüller lifts
// ---------------------------------------------------------------------------

/// The ring `W(F_{p^e}) / p^N`: Witt vectors of the residue field, truncated
/// at precision N. Elements are polynomials of degree < e over Z/p^N modulo
/// the naive monic lift of the residue field's defining polynomial.
#[derive(Debug, Clone)]
pub struct PadicRing {
    pub p: u64,
    pub e: u32,
    pub nprec: u32,
    /// p^N
    pub pn: BigUint,
    /// Monic lift of the defining polynomial of F_{p^e}, length e+1.
    pub modulus: Vec<BigUint>,
    pub residue: Arc<FieldTable>,
}

/// An element of an unramified p-adic ring, split into valuation and unit
/// part. `zero` marks a value that vanishes mod p^(valuation + N): either an
/// exact zero or exhausted precision — the caller decides which reading is
/// sound for its quantity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicScalar {
    pub valuation: u32,
    /// Coefficient vector of the unit part mod p^N, length e; invertible mod p
    /// unless `zero`.
    pub unit: Vec<BigUint>,
    pub nprec: u32,
    pub zero: bool,
}

impl PadicScalar {
    pub fn exact_zero(nprec: u32) -> PadicScalar {
        PadicScalar {
            valuation: 0,
            unit: vec![],
            nprec,
            zero: true,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// v_p as an integer, None for (apparent) zero.
    pub fn val_p(&self) -> Option<u32> {
        if self.zero {
            None
        } else {
            Some(self.valuation)
        }
    }
}

impl PadicRing {
    pub fn new(field: &Arc<FieldTable>, nprec: u32) -> Result<PadicRing> {
        if nprec < 1 {
            return Err(Error::Domain("precision N < 1".into()));
        }
        let p = field.p;
        let pn = BigUint::from(p).pow(nprec);
        let modulus: Vec<BigUint> = field.defining.iter().map(|&c| BigUint::from(c)).collect();
        Ok(PadicRing {
            p,
            e: field.k,
            nprec,
            pn,
            modulus,
            residue: field.clone(),
        })
    }

    fn raw_zero(&self) -> Vec<BigUint> {
        vec![BigUint::zero(); self.e as usize]
    }

    fn raw_one(&self) -> Vec<BigUint> {
        let mut v = self.raw_zero();
        v[0] = BigUint::one();
        v
    }

    fn raw_from_residue(&self, a: FieldElem) -> Vec<BigUint> {
        self.residue
            .coeffs(a)
            .iter()
            .map(|&c| BigUint::from(c))
            .collect()
    }

    fn raw_add(&self, a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x + y) % &self.pn)
            .collect()
    }

    fn raw_sub(&self, a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x + &self.pn - (y % &self.pn)) % &self.pn)
            .collect()
    }

    fn raw_mul(&self, a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
        let e = self.e as usize;
        let mut prod = vec![BigUint::zero(); 2 * e - 1];
        for i in 0..e {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..e {
                if b[j].is_zero() {
                    continue;
                }
                prod[i + j] += &a[i] * &b[j];
            }
        }
        for v in prod.iter_mut() {
            *v %= &self.pn;
        }
        // reduce modulo the monic lift
        for i in (e..prod.len()).rev() {
            let c = prod[i].clone();
            if !c.is_zero() {
                for j in 0..e {
                    let s = (&c * &self.modulus[j]) % &self.pn;
                    prod[i - e + j] = (&prod[i - e + j] + &self.pn - s) % &self.pn;
                }
            }
        }
        prod.truncate(e);
        prod
    }

    fn raw_scalar_mul(&self, a: &[BigUint], s: &BigUint) -> Vec<BigUint> {
        a.iter().map(|x| (x * s) % &self.pn).collect()
    }

    fn raw_pow(&self, a: &[BigUint], mut e: u64) -> Vec<BigUint> {
        let mut base = a.to_vec();
        let mut r = self.raw_one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.raw_mul(&r, &base);
            }
            base = self.raw_mul(&base, &base);
            e >>= 1;
        }
        r
    }

    /// Smallest p-valuation among the coordinates (valid because the
    /// extension is unramified); None when all coordinates vanish mod p^N.
    fn raw_valuation(&self, a: &[BigUint]) -> Option<u32> {
        let p = BigUint::from(self.p);
        let mut best: Option<u32> = None;
        for c in a {
            if c.is_zero() {
                continue;
            }
            let mut v = 0u32;
            let mut r = c.clone();
            while (&r % &p).is_zero() {
                r /= &p;
                v += 1;
            }
            best = Some(best.map_or(v, |b| b.min(v)));
            if best == Some(0) {
                return Some(0);
            }
        }
        best
    }

    fn raw_divide_p_power(&self, a: &[BigUint], v: u32) -> Vec<BigUint> {
        let pv = BigUint::from(self.p).pow(v);
        a.iter().map(|c| c / &pv).collect()
    }

    /// Normalize a raw vector into a PadicScalar. The unit part keeps only
    /// the digits actually known (N - 0 for products of normalized inputs).
    pub fn normalize(&self, a: Vec<BigUint>) -> PadicScalar {
        match self.raw_valuation(&a) {
            None => PadicScalar::exact_zero(self.nprec),
            Some(v) => PadicScalar {
                valuation: v,
                unit: self.raw_divide_p_power(&a, v),
                nprec: self.nprec,
                zero: false,
            },
        }
    }

    fn denormalize(&self, a: &PadicScalar) -> Vec<BigUint> {
        if a.zero {
            return self.raw_zero();
        }
        let pv = BigUint::from(self.p).pow(a.valuation);
        a.unit.iter().map(|c| (c * &pv) % &self.pn).collect()
    }

    pub fn zero_elem(&self) -> PadicScalar {
        PadicScalar::exact_zero(self.nprec)
    }

    pub fn one_elem(&self) -> PadicScalar {
        PadicScalar {
            valuation: 0,
            unit: self.raw_one(),
            nprec: self.nprec,
            zero: false,
        }
    }

    pub fn from_biguint(&self, n: &BigUint) -> PadicScalar {
        let mut v = self.raw_zero();
        v[0] = n % &self.pn;
        self.normalize(v)
    }

    pub fn from_i128(&self, n: i128) -> PadicScalar {
        let m = BigUint::from(n.unsigned_abs());
        let mut v = self.raw_zero();
        v[0] = m % &self.pn;
        if n < 0 {
            v[0] = (&self.pn - &v[0]) % &self.pn;
        }
        self.normalize(v)
    }

    pub fn add(&self, a: &PadicScalar, b: &PadicScalar) -> PadicScalar {
        // exact for distinct valuations; a sum with cancellation re-extracts
        // p powers from the representation, so the valuation is exact as long
        // as digits remain
        let ra = self.denormalize(a);
        let rb = self.denormalize(b);
        self.normalize(self.raw_add(&ra, &rb))
    }

    pub fn sub(&self, a: &PadicScalar, b: &PadicScalar) -> PadicScalar {
        let ra = self.denormalize(a);
        let rb = self.denormalize(b);
        self.normalize(self.raw_sub(&ra, &rb))
    }

    pub fn mul(&self, a: &PadicScalar, b: &PadicScalar) -> PadicScalar {
        // products track valuation exactly: multiply units, add valuations
        if a.zero || b.zero {
            return self.zero_elem();
        }
        let u = self.raw_mul(&a.unit, &b.unit);
        let mut r = self.normalize(u);
        if r.zero {
            return r; // cannot happen for true units, defensive for p | unit sums
        }
        r.valuation += a.valuation + b.valuation;
        r
    }

    pub fn pow(&self, a: &PadicScalar, e: u64) -> PadicScalar {
        if a.zero {
            return if e == 0 { self.one_elem() } else { self.zero_elem() };
        }
        let u = self.raw_pow(&a.unit, e);
        let mut r = self.normalize(u);
        if !r.zero {
            r.valuation += (a.valuation as u64 * e) as u32;
        }
        r
    }

    /// Invert a unit (valuation 0) by Newton iteration on 1/x.
    pub fn inv_unit(&self, a: &PadicScalar) -> Result<PadicScalar> {
        if a.zero || a.valuation != 0 {
            return Err(Error::Domain("inverse requires a unit".into()));
        }
        // residue inverse, then Hensel lifting x -> x(2 - a x)
        let res = self.reduce(a);
        let res_inv = self.residue.inv(res)?;
        let mut x = self.raw_from_residue(res_inv);
        let two = {
            let mut t = self.raw_zero();
            t[0] = BigUint::from(2u32);
            t
        };
        let mut prec = 1u32;
        while prec < self.nprec {
            let ax = self.raw_mul(&a.unit, &x);
            let corr = self.raw_sub(&two, &ax);
            x = self.raw_mul(&x, &corr);
            prec *= 2;
        }
        Ok(PadicScalar {
            valuation: 0,
            unit: x,
            nprec: self.nprec,
            zero: false,
        })
    }

    /// Exact division by an integer k = p^e * k' (asserts the valuation
    /// supports it).
    pub fn div_int(&self, a: &PadicScalar, k: u64) -> Result<PadicScalar> {
        if a.zero {
            return Ok(self.zero_elem());
        }
        let mut e = 0u32;
        let mut kk = k;
        while kk.is_multiple_of(self.p) {
            kk /= self.p;
            e += 1;
        }
        if a.valuation < e {
            return Err(Error::Internal(format!(
                "inexact division by {k}: valuation {} < {e}",
                a.valuation
            )));
        }
        let kinv = self.from_biguint(&mod_inverse(&BigUint::from(kk), &self.pn));
        let mut r = self.mul(a, &kinv);
        if !r.zero {
            r.valuation -= e;
        }
        Ok(r)
    }

    /// Reduction to the residue field.
    pub fn reduce(&self, a: &PadicScalar) -> FieldElem {
        if a.zero || a.valuation > 0 {
            return 0;
        }
        let p = BigUint::from(self.p);
        let digits: Vec<u64> = a
            .unit
            .iter()
            .map(|c| (c % &p).to_u64_digits().first().copied().unwrap_or(0))
            .collect();
        self.residue.from_coeffs(&digits)
    }

    /// The Teichmüller lift: the unique root of unity of order dividing
    /// p^e - 1 congruent to x mod p, by Newton iteration on z^q - z.
    pub fn teichmuller(&self, x: FieldElem) -> Result<PadicScalar> {
        if x == 0 {
            return Err(Error::Domain("Teichmüller lift of zero".into()));
        }
        let q = self.residue.q;
        let mut z = self.raw_from_residue(x);
        // Newton for f(z) = z^q - z: z' = z - (z^q - z) / (q z^(q-1) - 1);
        // the derivative is a unit since p | q.
        let iterations = 32 - (self.nprec.leading_zeros()) + 1;
        for _ in 0..=iterations {
            let zq1 = self.raw_pow(&z, q - 1);
            let zq = self.raw_mul(&zq1, &z);
            let f = self.raw_sub(&zq, &z);
            if f.iter().all(|c| c.is_zero()) {
                break;
            }
            let qbig = BigUint::from(q) % &self.pn;
            let mut deriv = self.raw_scalar_mul(&zq1, &qbig);
            deriv = self.raw_sub(&deriv, &self.raw_one());
            // invert the unit deriv
            let dsc = PadicScalar {
                valuation: 0,
                unit: deriv,
                nprec: self.nprec,
                zero: false,
            };
            let dinv = self.inv_unit(&dsc)?;
            let delta = self.raw_mul(&f, &dinv.unit);
            z = self.raw_sub(&z, &delta);
        }
        debug_assert!({
            let zq = self.raw_mul(&self.raw_pow(&z, q - 1), &z);
            zq == z
        });
        Ok(PadicScalar {
            valuation: 0,
            unit: z,
            nprec: self.nprec,
            zero: false,
        })
    }

    /// Render as `p^v * (c_0 + c_1 x + ...)` with decimal digits.
    pub fn format_scalar(&self, a: &PadicScalar) -> String {
        if a.zero {
            return "0".into();
        }
        let coeffs: Vec<String> = a.unit.iter().map(|c| c.to_string()).collect();
        if self.e == 1 {
            format!("p^{}*{}", a.valuation, coeffs[0])
        } else {
            format!("p^{}*[{}]", a.valuation, coeffs.join(","))
        }
    }
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> BigUint {
    // extended Euclid over BigInt
    use num_bigint::BigInt;
    let (mut r0, mut r1) = (BigInt::from(m.clone()), BigInt::from(a.clone()));
    let (mut s0, mut s1) = (BigInt::from(0), BigInt::from(1));
    while r1 != BigInt::from(0) {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let s2 = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s2);
    }
    assert!(r0 == BigInt::from(1), "not invertible");
    let m_int = BigInt::from(m.clone());
    let s = ((s0 % &m_int) + &m_int) % &m_int;
    s.to_biguint().unwrap()
}

/// Convenience: the Teichmüller lift of x in F_{p^e} at precision N.
pub fn teichmuller(field: &Arc<FieldTable>, x: FieldElem, nprec: u32) -> Result<PadicScalar> {
    if nprec < 1 {
        return Err(Error::Domain("precision N < 1".into()));
    }
    let ring = PadicRing::new(field, nprec)?;
    ring.teichmuller(x)
}
