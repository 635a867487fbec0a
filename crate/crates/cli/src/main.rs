//! Command-line interface: curve analysis, Ulmer-family reports, Jacobi slope
//! tables, L-polynomials, twist scans, Tate-style reduction tables, degree
//! bounds, valuation-minimum verification, and cache management.

use clap::{Args, Parser, Subcommand};
use ffmanin::funcfield::{parse_int_poly, DirichletCharacter, Poly, PolyRing};
use ffmanin::lfun::{EulerCache, LMode};
use ffmanin::padic::ValuedPoly;
use ffmanin::{curve, ff, jacobi, lfun, manin, padic, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ffmanin", version, about = "Exact Manin-constant bounds for elliptic curves over F_q(T)")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Config {
    /// Characteristic p (prime, >= 5 for curve commands).
    #[arg(long, global = true, default_value_t = 7)]
    p: u64,
    /// Extension degree d with q = p^d.
    #[arg(long, global = true, default_value_t = 1)]
    d: u32,
    /// p-adic working precision (digits of p).
    #[arg(long, global = true, default_value_t = 32)]
    precision: u32,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Point-count cache file.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Seed for randomized factorization splitting.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Allow point counts at places of degree >= 4 (slow).
    #[arg(long, global = true, default_value_t = false)]
    deep: bool,
    /// Skip slow point counts (default; the opposite of --deep).
    #[arg(long, global = true, default_value_t = false, conflicts_with = "deep")]
    skip_slow: bool,
    /// Largest conductor degree in character scans.
    #[arg(long, global = true, default_value_t = 2)]
    max_cond_deg: u32,
    /// Character orders to scan, comma separated.
    #[arg(long, global = true, default_value = "2")]
    orders: String,
    /// Cap on the number of characters scanned.
    #[arg(long, global = true, default_value_t = 24)]
    max_chars: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Full Manin-constant analysis of a curve.
    Analyze {
        /// Curve "a1;a2;a3;a4;a6" with rational-function entries.
        #[arg(long)]
        curve: String,
        /// Extra characters "mod=<poly>;order=<r>;exps=<e1,..>;z=<k>".
        #[arg(long = "char")]
        chars: Vec<String>,
    },
    /// Fast-path report for y^2 + xy = x^3 - T^n.
    Ulmer {
        #[arg(long)]
        n: Option<u64>,
        /// Grid mode: run n in [1, n-max] over the p list.
        #[arg(long)]
        n_max: Option<u64>,
        /// Comma-separated list of p values for grid mode.
        #[arg(long, default_value = "5,7,11,13")]
        p_list: String,
    },
    /// Orbit/slope table of the Fermat-quotient H^2 data.
    Jacobi {
        #[arg(long)]
        n: u64,
    },
    /// L-polynomial of a curve.
    Lfun {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value = "completed")]
        mode: String,
    },
    /// Lower-bound scan over tame characters of small conductor.
    TwistScan {
        #[arg(long)]
        curve: String,
    },
    /// Reduction table (Kodaira types, conductor, discriminant).
    Tate {
        #[arg(long)]
        curve: String,
    },
    /// Numeric modular-degree bounds.
    DegreeBound {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        g: u32,
        #[arg(long, default_value_t = 1)]
        deg_inf: u32,
        #[arg(long)]
        deg_m: u32,
        #[arg(long, default_value_t = 0)]
        m_upper: u32,
    },
    /// Verify the valuation-minimum identity for an integer polynomial.
    Lemma42 {
        /// Polynomial in T with integer coefficients.
        #[arg(long)]
        poly: String,
    },
    /// Inspect or clear the point-count cache.
    Cache {
        #[arg(value_parser = ["inspect", "clear"])]
        action: String,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Domain(_) | Error::ConductorMeetsBadPlaces => 2,
        Error::SingularCurve => 3,
        Error::Unsupported(_) => 4,
        Error::Internal(_) | Error::TailNonvanishing(_) => 5,
        Error::ZeroPolynomial
        | Error::PrecisionExhausted
        | Error::SignIndeterminable
        | Error::MinimumNotAttained => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.config.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.config.threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn max_count_degree(cfg: &Config) -> Option<u32> {
    if cfg.deep {
        None
    } else {
        Some(3)
    }
}

fn open_cache(cfg: &Config) -> Result<EulerCache, Error> {
    match &cfg.cache {
        Some(path) => EulerCache::load(path, cfg.p, cfg.d),
        None => Ok(EulerCache::in_memory()),
    }
}

fn emit(cfg: &Config, name: &str, body: serde_json::Value) -> Result<(), Error> {
    let report = serde_json::json!({
        "tool": "ffmanin",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "p": cfg.p,
        "d": cfg.d,
        "seed": cfg.seed,
        "report": body,
    });
    match cfg.format.as_str() {
        "json" => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
        "csv" => {
            if let Some(rows) = body.as_array() {
                if let Some(first) = rows.first().and_then(|r| r.as_object()) {
                    let keys: Vec<&String> = first.keys().collect();
                    println!(
                        "{}",
                        keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",")
                    );
                    for row in rows {
                        let obj = row.as_object().unwrap();
                        let vals: Vec<String> =
                            keys.iter().map(|k| scalar_str(&obj[k.as_str()])).collect();
                        println!("{}", vals.join(","));
                    }
                }
            } else if let Some(obj) = body.as_object() {
                for (k, v) in obj {
                    println!("{k},{}", scalar_str(v));
                }
            }
        }
        "text" => {
            println!("# ffmanin {name} (p={}, d={}, seed={})", cfg.p, cfg.d, cfg.seed);
            print_text(&body, 0);
        }
        other => {
            return Err(Error::Parse(format!("unknown format {other}")));
        }
    }
    Ok(())
}

fn scalar_str(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn print_text(v: &serde_json::Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                match val {
                    serde_json::Value::Object(_) | serde_json::Value::Array(_) => {
                        println!("{pad}{k}:");
                        print_text(val, indent + 1);
                    }
                    _ => println!("{pad}{k}: {}", scalar_str(val)),
                }
            }
        }
        serde_json::Value::Array(items) => {
            for item in items {
                match item {
                    serde_json::Value::Object(_) | serde_json::Value::Array(_) => {
                        println!("{pad}-");
                        print_text(item, indent + 1);
                    }
                    _ => println!("{pad}- {}", scalar_str(item)),
                }
            }
        }
        other => println!("{pad}{}", scalar_str(other)),
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = &cli.config;
    if cfg.precision < 8 {
        return Err(Error::Domain("precision N must be at least 8".into()));
    }
    match &cli.command {
        Command::Analyze { curve: spec, chars } => {
            let field = ff::build_field(cfg.p, cfg.d)?;
            let e = curve::WeierstrassCurve::parse(&field, spec)?;
            let mut characters = Vec::new();
            for c in chars {
                characters.push(DirichletCharacter::parse(&field, c)?);
            }
            let cache = open_cache(cfg)?;
            let report = manin::analyze(
                &e,
                &manin::AnalyzeOptions {
                    characters,
                    nprec: cfg.precision,
                    max_count_degree: max_count_degree(cfg),
                    cache: &cache,
                    emit_lfunction: true,
                },
            )?;
            cache.save(cfg.p, cfg.d)?;
            emit(cfg, "analyze", serde_json::to_value(&report).unwrap())
        }
        Command::Ulmer { n, n_max, p_list } => {
            if let Some(nmax) = n_max {
                let ps: Vec<u64> = p_list
                    .split(',')
                    .map(|s| s.trim().parse::<u64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| Error::Parse("bad p list".into()))?;
                let mut rows = Vec::new();
                for &p in &ps {
                    for n in 1..=*nmax {
                        if n % p == 0 {
                            continue;
                        }
                        let r = jacobi::ulmer_report(p, cfg.d, n, cfg.precision)?;
                        rows.push(serde_json::json!({
                            "p": p,
                            "d": cfg.d,
                            "n": n,
                            "deg_delta": r.deg_delta,
                            "deg_conductor": r.deg_conductor,
                            "deg_conductor_finite": r.deg_conductor_finite,
                            "l_q": r.l_q,
                            "lower": r.lower_bound,
                            "upper": r.upper_bound,
                            "exact": r.manin_exact,
                        }));
                    }
                }
                return emit(cfg, "ulmer-grid", serde_json::Value::Array(rows));
            }
            let n = n.ok_or_else(|| Error::Parse("--n or --n-max required".into()))?;
            let report = jacobi::ulmer_report(cfg.p, cfg.d, n, cfg.precision)?;
            emit(cfg, "ulmer", serde_json::to_value(&report).unwrap())
        }
        Command::Jacobi { n } => {
            let h2 = jacobi::h2_polynomial_checked(cfg.p, cfg.d, *n, cfg.precision)?;
            let rows: Vec<serde_json::Value> = h2
                .orbits
                .iter()
                .map(|v| {
                    serde_json::json!({
                        "k": v.orbit.k,
                        "u": v.orbit.u,
                        "valuation": jacobi::rat_string(v.valuation),
                        "checked_padically": v.padic.is_some(),
                    })
                })
                .collect();
            let body = serde_json::json!({
                "n": n,
                "degree": h2.degree,
                "orbits": rows,
                "slopes": h2.slopes.iter().map(|s| jacobi::rat_string(*s)).collect::<Vec<_>>(),
                "l_q": jacobi::rat_string(h2.l_q),
            });
            emit(cfg, "jacobi", body)
        }
        Command::Lfun { curve: spec, mode } => {
            let field = ff::build_field(cfg.p, cfg.d)?;
            let e = curve::WeierstrassCurve::parse(&field, spec)?;
            let mode = match mode.as_str() {
                "completed" => LMode::Completed,
                "full" => LMode::Full,
                other => return Err(Error::Parse(format!("unknown mode {other}"))),
            };
            let cache = open_cache(cfg)?;
            let l = lfun::lfunction(&e, mode, &cache, max_count_degree(cfg))?;
            cache.save(cfg.p, cfg.d)?;
            emit(cfg, "lfun", l.to_json())
        }
        Command::TwistScan { curve: spec } => {
            let field = ff::build_field(cfg.p, cfg.d)?;
            let e = curve::WeierstrassCurve::parse(&field, spec)?;
            let orders: Vec<u64> = cfg
                .orders
                .split(',')
                .map(|s| s.trim().parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::Parse("bad orders list".into()))?;
            let characters =
                scan_characters(&field, &e, cfg.max_cond_deg, &orders, cfg.max_chars, cfg.seed)?;
            let cache = open_cache(cfg)?;
            let (lower, witnesses) = manin::lower_prop45(
                &e,
                &characters,
                cfg.precision,
                &cache,
                max_count_degree(cfg),
            )?;
            cache.save(cfg.p, cfg.d)?;
            let upper = manin::upper_thm13(&e)?;
            let body = serde_json::json!({
                "curve": e.to_spec_string(),
                "scanned": characters.len(),
                "scan": "restricted scan; exactness never claimed from exhaustion",
                "lower": jacobi::rat_string(lower),
                "upper": jacobi::rat_string(upper),
                "witnesses": serde_json::to_value(&witnesses).unwrap(),
            });
            emit(cfg, "twist-scan", body)
        }
        Command::Tate { curve: spec } => {
            let field = ff::build_field(cfg.p, cfg.d)?;
            let e = curve::WeierstrassCurve::parse(&field, spec)?;
            let red = curve::global_reduction(&e)?;
            let rows: Vec<serde_json::Value> = red
                .locals
                .iter()
                .map(|loc| {
                    serde_json::json!({
                        "place": loc.place.label(field.as_ref()),
                        "degree": loc.place.degree,
                        "kodaira": loc.kodaira.to_string(),
                        "v_delta_min": loc.v_delta_min,
                        "conductor_exponent": loc.conductor_exponent,
                        "scale": loc.minimalizing_scale,
                    })
                })
                .collect();
            let body = serde_json::json!({
                "curve": e.to_spec_string(),
                "deg_delta": red.deg_delta,
                "deg_conductor": red.deg_conductor,
                "deg_conductor_finite": red.deg_conductor_finite,
                "places": rows,
            });
            emit(cfg, "tate", body)
        }
        Command::DegreeBound {
            q,
            g,
            deg_inf,
            deg_m,
            m_upper,
        } => {
            let r = manin::degree_bounds(*q, *g, *deg_inf, *deg_m, *m_upper)?;
            emit(cfg, "degree-bound", serde_json::to_value(&r).unwrap())
        }
        Command::Lemma42 { poly } => {
            let coeffs = parse_int_poly(poly)?;
            let vp = ValuedPoly::from_ints(cfg.p, cfg.d, coeffs);
            let report = padic::verify_min_valuation(&vp, cfg.precision)?;
            let samples: Vec<serde_json::Value> = report
                .samples
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "order": s.order,
                        "power": s.power,
                        "val_q": jacobi::rat_string(s.val_q),
                    })
                })
                .collect();
            let body = serde_json::json!({
                "poly": poly,
                "formula": jacobi::rat_string(report.formula),
                "attained_at": report.attained_at.map(|(m, j)| format!("order {m}, power {j}")),
                "samples": samples,
            });
            emit(cfg, "lemma42", body)
        }
        Command::Cache { action } => {
            let Some(path) = &cfg.cache else {
                return Err(Error::Parse("--cache PATH required".into()));
            };
            match action.as_str() {
                "inspect" => {
                    let cache = EulerCache::load(path, cfg.p, cfg.d)?;
                    let entries = cache.entries();
                    let body = serde_json::json!({
                        "path": path.display().to_string(),
                        "entries": entries.len(),
                        "sample": entries
                            .iter()
                            .take(20)
                            .map(|(fp, place, ext, tr)| format!("{fp},{place},{ext},{tr}"))
                            .collect::<Vec<_>>(),
                    });
                    emit(cfg, "cache", body)
                }
                "clear" => {
                    if path.exists() {
                        std::fs::remove_file(path)
                            .map_err(|e| Error::Parse(format!("cannot remove cache: {e}")))?;
                    }
                    emit(cfg, "cache", serde_json::json!({"cleared": true}))
                }
                _ => unreachable!(),
            }
        }
    }
}

/// Enumerate valid characters with squarefree moduli coprime to the
/// conductor, degree <= max_deg, with the given orders.
fn scan_characters(
    field: &std::sync::Arc<ff::FieldTable>,
    e: &curve::WeierstrassCurve,
    max_deg: u32,
    orders: &[u64],
    cap: usize,
    seed: u64,
) -> Result<Vec<DirichletCharacter>, Error> {
    let red = curve::global_reduction(e)?;
    let ring = PolyRing::new(field.as_ref());
    let mut out = Vec::new();
    'outer: for deg in 2..=max_deg.max(2) {
        let total = field.q.pow(deg);
        for code in 0..total {
            let mut coeffs = vec![0u64; deg as usize + 1];
            let mut c = code;
            for slot in coeffs.iter_mut().take(deg as usize) {
                *slot = c % field.q;
                c /= field.q;
            }
            coeffs[deg as usize] = 1;
            let m = Poly::from_coeffs(coeffs);
            if !ring.gcd(&m, &ring.derivative(&m)).is_constant() {
                continue;
            }
            let coprime = red.conductor.support().all(|pl| match pl.monic_poly() {
                Some(u) => ring.gcd(&m, u).is_constant(),
                None => true,
            });
            if !coprime {
                continue;
            }
            let factors = ffmanin::funcfield::factor(field.as_ref(), &m, seed)?;
            for &r in orders {
                // scan one valid exponent tuple per (modulus, order)
                let k = factors.len();
                let mut tuple = vec![1u64; k];
                loop {
                    if let Ok(chi) = DirichletCharacter::new(field, &m, r, &tuple, 0) {
                        out.push(chi);
                        if out.len() >= cap {
                            break 'outer;
                        }
                        break;
                    }
                    let mut i = 0;
                    loop {
                        if i == k {
                            break;
                        }
                        tuple[i] += 1;
                        if tuple[i] < r {
                            break;
                        }
                        tuple[i] = 1;
                        i += 1;
                    }
                    if i == k {
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}
