//! Command dispatch for the `gpi` binary.
//!
//! Every subcommand reads flags of the form `--key value`, writes exactly
//! one JSON document to standard output, and exits with
//!
//! * 0 — computed successfully / the checked identity holds,
//! * 1 — the identity is violated or a decomposition failed (details in the
//!   JSON),
//! * 2 — usage or input error.
//!
//! Identical invocations produce byte-identical output: sampled modes take
//! their seed from `--seed` (default 0) and surface it in the result.

use std::collections::BTreeMap;
use std::io::Write;

use serde_json::{json, Value};

use gpi_core::addmap::AdditiveMap;
use gpi_core::algebra::{AlgebraDescriptor, FiniteAlgebra};
use gpi_core::error::Error;
use gpi_core::expr;
use gpi_core::genpoly::{Degree, GenPoly};
use gpi_core::identity::{self, Mode, DEFAULT_TRIALS};
use gpi_core::numtheory;
use gpi_core::solver::{self, IdentityTemplate};
use gpi_core::DEFAULT_BUDGET;

const USAGE: &str = "usage: gpi <subcommand> [--flag value ...]\n\
subcommands: algebra eval linearize homog is-zero-formal check-gpi check-hua \
check-fi solve-fi decompose binom lemma3 poly-p poly-q classify units-generate";

struct Args {
    flags: BTreeMap<String, String>,
    switches: Vec<String>,
}

impl Args {
    fn parse(argv: &[String]) -> Result<Args, String> {
        let mut flags = BTreeMap::new();
        let mut switches = Vec::new();
        let mut i = 0;
        while i < argv.len() {
            let a = &argv[i];
            let Some(key) = a.strip_prefix("--") else {
                return Err(format!("unexpected positional argument {a:?}"));
            };
            // Boolean switches take no value.
            if matches!(key, "units" | "center") {
                switches.push(key.to_string());
                i += 1;
                continue;
            }
            let Some(value) = argv.get(i + 1) else {
                return Err(format!("flag --{key} needs a value"));
            };
            flags.insert(key.to_string(), value.clone());
            i += 2;
        }
        Ok(Args { flags, switches })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.flags.get(key).map(|s| s.as_str())
    }

    fn require(&self, key: &str) -> Result<&str, String> {
        self.get(key).ok_or_else(|| format!("missing required flag --{key}"))
    }

    fn u64(&self, key: &str) -> Result<u64, String> {
        self.require(key)?
            .parse()
            .map_err(|_| format!("--{key} must be a non-negative integer"))
    }

    fn u64_opt(&self, key: &str, default: u64) -> Result<u64, String> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|_| format!("--{key} must be a non-negative integer")),
            None => Ok(default),
        }
    }

    fn has_switch(&self, key: &str) -> bool {
        self.switches.iter().any(|s| s == key)
    }

    fn budget(&self) -> Result<u64, String> {
        self.u64_opt("budget", DEFAULT_BUDGET)
    }
}

fn load_algebra(spec: &str) -> Result<FiniteAlgebra, String> {
    if let Some(rest) = spec.strip_prefix("matrix:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err("matrix spec is matrix:n,p[,k]".into());
        }
        let n: usize = parts[0].parse().map_err(|_| "bad n in matrix spec".to_string())?;
        let p: u64 = parts[1].parse().map_err(|_| "bad p in matrix spec".to_string())?;
        let k: usize = match parts.get(2) {
            Some(s) => s.parse().map_err(|_| "bad k in matrix spec".to_string())?,
            None => 1,
        };
        return FiniteAlgebra::matrix_algebra(n, p, k, None).map_err(|e| e.to_string());
    }
    if let Some(rest) = spec.strip_prefix("field:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.is_empty() || parts.len() > 2 {
            return Err("field spec is field:p[,k]".into());
        }
        let p: u64 = parts[0].parse().map_err(|_| "bad p in field spec".to_string())?;
        let k: usize = match parts.get(1) {
            Some(s) => s.parse().map_err(|_| "bad k in field spec".to_string())?,
            None => 1,
        };
        return FiniteAlgebra::galois_field(p, k, None).map_err(|e| e.to_string());
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| format!("cannot read algebra file {spec:?}: {e}"))?;
    let desc = AlgebraDescriptor::from_json(&text).map_err(|e| e.to_string())?;
    FiniteAlgebra::build(desc).map_err(|e| e.to_string())
}

/// Split on commas that are not nested inside brackets or parentheses, so
/// map specs like `l:[1,0,0,2]` survive.
fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '[' | '(' => {
                depth += 1;
                cur.push(c);
            }
            ']' | ')' => {
                depth -= 1;
                cur.push(c);
            }
            c if c == sep && depth == 0 => {
                out.push(cur.trim().to_string());
                cur = String::new();
            }
            c => cur.push(c),
        }
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn const_element(spec: &str, algebra: &FiniteAlgebra) -> Result<gpi_core::algebra::Element, String> {
    let g = expr::parse_expr(spec, algebra, 0).map_err(|e| e.to_string())?;
    g.eval(&[]).map_err(|e| e.to_string())
}

fn parse_map(spec: &str, algebra: &FiniteAlgebra) -> Result<AdditiveMap, String> {
    match spec {
        "id" => return Ok(AdditiveMap::identity(algebra)),
        "zero" | "0" => return Ok(AdditiveMap::zero(algebra)),
        "transpose" => return AdditiveMap::transpose(algebra).map_err(|e| e.to_string()),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("frob") {
        let l: u32 = if rest.is_empty() {
            1
        } else {
            rest.parse().map_err(|_| format!("bad Frobenius power in {spec:?}"))?
        };
        return AdditiveMap::frobenius(algebra, l).map_err(|e| e.to_string());
    }
    if let Some(e) = spec.strip_prefix("l:") {
        return Ok(AdditiveMap::left_mul(&const_element(e, algebra)?));
    }
    if let Some(e) = spec.strip_prefix("r:") {
        return Ok(AdditiveMap::right_mul(&const_element(e, algebra)?));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read map file {path:?}: {e}"))?;
        let v: Value =
            serde_json::from_str(&text).map_err(|e| format!("bad map JSON: {e}"))?;
        let rows = v
            .get("matrix")
            .and_then(|m| m.as_array())
            .ok_or("map file needs a \"matrix\" array")?;
        let rows: Result<Vec<Vec<u64>>, String> = rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or("matrix rows must be arrays".to_string())?
                    .iter()
                    .map(|x| x.as_u64().ok_or("matrix entries must be integers".to_string()))
                    .collect()
            })
            .collect();
        return AdditiveMap::from_rows(algebra, rows?).map_err(|e| e.to_string());
    }
    Err(format!(
        "unknown map spec {spec:?}: use id, zero, frob[K], transpose, l:EXPR, r:EXPR or file:PATH"
    ))
}

fn degree_json(d: Degree) -> Value {
    match d {
        Degree::MinusInfinity => Value::Null,
        Degree::Finite(n) => json!(n),
    }
}

fn poly_json(g: &GenPoly) -> Value {
    json!({
        "poly": g.to_json(),
        "text": expr::print_genpoly(g),
        "degree": degree_json(g.degree()),
    })
}

fn parse_expr_flag(args: &Args, algebra: &FiniteAlgebra) -> Result<GenPoly, String> {
    let text = args.require("expr")?;
    let vars = match args.get("vars") {
        Some(v) => v.parse().map_err(|_| "--vars must be a non-negative integer".to_string())?,
        None => expr::infer_num_vars(text).map_err(|e| e.to_string())?,
    };
    expr::parse_expr(text, algebra, vars).map_err(|e| e.to_string())
}

enum Outcome {
    Ok(Value),
    Violated(Value),
    Usage(String),
}

fn dispatch(argv: &[String]) -> Outcome {
    let Some(cmd) = argv.first() else {
        return Outcome::Usage(USAGE.to_string());
    };
    let args = match Args::parse(&argv[1..]) {
        Ok(a) => a,
        Err(e) => return Outcome::Usage(e),
    };
    let result = match cmd.as_str() {
        "algebra" => cmd_algebra(&args),
        "eval" => cmd_eval(&args),
        "linearize" => cmd_linearize(&args),
        "homog" => cmd_homog(&args),
        "is-zero-formal" => cmd_is_zero_formal(&args),
        "check-gpi" => cmd_check_gpi(&args),
        "check-hua" => cmd_check_hua(&args),
        "check-fi" => cmd_check_fi(&args),
        "solve-fi" => cmd_solve_fi(&args),
        "decompose" => cmd_decompose(&args),
        "binom" => cmd_binom(&args),
        "lemma3" => cmd_lemma3(&args),
        "poly-p" => cmd_poly_p(&args),
        "poly-q" => cmd_poly_q(&args),
        "classify" => cmd_classify(&args),
        "units-generate" => cmd_units_generate(&args),
        other => return Outcome::Usage(format!("unknown subcommand {other:?}\n{USAGE}")),
    };
    match result {
        Ok(outcome) => outcome,
        Err(e) => Outcome::Usage(e),
    }
}

type CmdResult = Result<Outcome, String>;

fn cmd_algebra(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let mut doc = json!({
        "p": a.p(),
        "dim": a.dim(),
        "basis": a.basis_labels(),
        "center_dim": a.center_dim(),
        "commutative": a.is_commutative(),
    });
    if args.has_switch("units") {
        let units = a
            .enumerate_units_with_budget(args.budget()?)
            .map_err(|e| e.to_string())?;
        doc["units"] = json!(units.len());
    }
    if args.has_switch("center") {
        doc["center"] =
            json!(a.center().iter().map(|z| z.coords().to_vec()).collect::<Vec<_>>());
    }
    if let Some(path) = args.get("out") {
        std::fs::write(path, a.descriptor().to_json())
            .map_err(|e| format!("cannot write {path:?}: {e}"))?;
        doc["wrote"] = json!(path);
    }
    Ok(Outcome::Ok(doc))
}

fn cmd_eval(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let g = parse_expr_flag(args, &a)?;
    match args.get("at") {
        Some(at) => {
            let parts = split_top_level(at, ';');
            if parts.len() != g.num_vars() {
                return Err(format!(
                    "--at supplies {} value(s), expression has {} variable(s)",
                    parts.len(),
                    g.num_vars()
                ));
            }
            let assignment: Result<Vec<_>, String> =
                parts.iter().map(|t| const_element(t, &a)).collect();
            let value = g.eval(&assignment?).map_err(|e| e.to_string())?;
            Ok(Outcome::Ok(json!({
                "value": value.coords(),
                "is_zero": value.is_zero(),
            })))
        }
        None => Ok(Outcome::Ok(poly_json(&g))),
    }
}

fn cmd_linearize(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let g = parse_expr_flag(args, &a)?;
    let t = args.u64("t")? as usize;
    let lin = g.linearize(t).map_err(|e| e.to_string())?;
    let mut doc = poly_json(&lin);
    doc["t"] = json!(t);
    Ok(Outcome::Ok(doc))
}

fn cmd_homog(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let g = parse_expr_flag(args, &a)?;
    let j = args.u64("degree")? as usize;
    let part = g.homogeneous_part(j);
    let mut doc = poly_json(&part);
    doc["requested_degree"] = json!(j);
    Ok(Outcome::Ok(doc))
}

fn cmd_is_zero_formal(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let g = parse_expr_flag(args, &a)?;
    Ok(Outcome::Ok(json!({
        "zero": g.is_zero_formal(),
        "degree": degree_json(g.degree()),
    })))
}

fn mode_from_args(args: &Args) -> Result<Mode, String> {
    match args.get("mode").unwrap_or("exhaustive") {
        "exhaustive" => Ok(Mode::Exhaustive),
        "sampled" => Ok(Mode::Sampled {
            seed: args.u64_opt("seed", 0)?,
            trials: args.u64_opt("trials", DEFAULT_TRIALS)?,
        }),
        other => Err(format!("--mode must be exhaustive or sampled, got {other:?}")),
    }
}

fn verdict_outcome(v: gpi_core::identity::Verdict, extra: Value) -> Outcome {
    let mut doc = v.to_json();
    if let Value::Object(extra) = extra {
        for (k, val) in extra {
            doc[k] = val;
        }
    }
    if v.holds {
        Outcome::Ok(doc)
    } else {
        Outcome::Violated(doc)
    }
}

fn cmd_check_gpi(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let g = parse_expr_flag(args, &a)?;
    let mode = mode_from_args(args)?;
    let v = identity::is_gpi(&g, mode, args.budget()?).map_err(|e| e.to_string())?;
    Ok(verdict_outcome(v, json!({})))
}

fn cmd_check_hua(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let report = identity::check_hua(&a, args.budget()?).map_err(|e| e.to_string())?;
    let admissible = report.admissible_pairs;
    Ok(verdict_outcome(report.verdict, json!({ "admissible_pairs": admissible })))
}

fn cmd_check_fi(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let n = args.u64("n")?;
    let f = parse_map(args.require("f")?, &a)?;
    let g = parse_map(args.require("g")?, &a)?;
    let v = identity::fi_residual(&f, &g, n, args.budget()?).map_err(|e| e.to_string())?;
    Ok(verdict_outcome(v, json!({ "n": n })))
}

fn cmd_solve_fi(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let template = match (args.get("template"), args.get("template-file")) {
        (Some("power"), None) => {
            IdentityTemplate::power_identity(&a, args.u64("n")?).map_err(|e| e.to_string())?
        }
        (Some(other), None) => {
            return Err(format!("unknown template {other:?}: use power or --template-file"))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read template file {path:?}: {e}"))?;
            IdentityTemplate::from_json(&text, &a).map_err(|e| e.to_string())?
        }
        (None, None) => return Err("need --template power or --template-file".into()),
        (Some(_), Some(_)) => {
            return Err("--template and --template-file are mutually exclusive".into())
        }
    };
    let budget = args.budget()?;
    let space = solver::solve(&template, budget).map_err(|e| e.to_string())?;
    let mut doc = space.to_json();
    match args.get("contains") {
        Some(specs) => {
            let maps: Result<Vec<AdditiveMap>, String> = split_top_level(specs, ',')
                .iter()
                .map(|s| parse_map(s, &a))
                .collect();
            let maps = maps?;
            if maps.len() != template.num_unknowns() {
                return Err(format!(
                    "--contains supplies {} map(s), template has {} unknown(s)",
                    maps.len(),
                    template.num_unknowns()
                ));
            }
            let by_eval = template.satisfies(&maps, budget).map_err(|e| e.to_string())?.holds;
            let by_linear = space.contains_linear(&maps);
            debug_assert_eq!(by_eval, by_linear);
            doc["contains"] = json!(by_eval);
            if by_eval {
                Ok(Outcome::Ok(doc))
            } else {
                Ok(Outcome::Violated(doc))
            }
        }
        None => Ok(Outcome::Ok(doc)),
    }
}

fn cmd_decompose(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let map = parse_map(args.require("map")?, &a)?;
    let max_terms = args.u64_opt("max-terms", (a.dim() * a.dim()) as u64)? as usize;
    match solver::elementary_decomposition(&map, max_terms) {
        Ok(pairs) => Ok(Outcome::Ok(json!({
            "count": pairs.len(),
            "terms": pairs
                .iter()
                .map(|(x, y)| json!([x.coords(), y.coords()]))
                .collect::<Vec<_>>(),
        }))),
        Err(Error::NotInSpan(msg)) => Ok(Outcome::Violated(json!({
            "decomposed": false,
            "reason": msg,
        }))),
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_binom(args: &Args) -> CmdResult {
    let k = args.u64("k")?;
    let t = args.u64("t")?;
    let p = args.u64("p")?;
    let residue = numtheory::binom_mod_p(k, t, p).map_err(|e| e.to_string())?;
    Ok(Outcome::Ok(json!({ "k": k, "t": t, "p": p, "residue": residue })))
}

fn cmd_lemma3(args: &Args) -> CmdResult {
    let k = args.u64("k")?;
    let p = args.u64("p")?;
    let (m, residue) = numtheory::binomial_criterion(k, p).map_err(|e| e.to_string())?;
    Ok(Outcome::Ok(json!({ "k": k, "p": p, "m": m, "residue": residue })))
}

fn cmd_poly_p(args: &Args) -> CmdResult {
    let n = args.u64("n")?;
    let p = args.u64("p")?;
    let poly = numtheory::power_defect_poly(n, p).map_err(|e| e.to_string())?;
    let mut doc = json!({
        "n": n,
        "p": p,
        "coeffs": poly.coeffs(),
        "is_zero": poly.is_zero(),
        "text": poly.display_in("X"),
    });
    if let Some(qs) = args.get("nonroot-q") {
        let q: u64 = qs.parse().map_err(|_| "--nonroot-q must be an integer".to_string())?;
        // q = p^r for the same p.
        let mut r = 0usize;
        let mut m = q;
        while m > 1 && m.is_multiple_of(p) {
            m /= p;
            r += 1;
        }
        if m != 1 || r == 0 {
            return Err(format!("--nonroot-q must be a power of p = {p}, got {q}"));
        }
        let nonroot = numtheory::find_defect_nonroot(n, p, r).map_err(|e| e.to_string())?;
        doc["nonroot"] = json!({
            "q": q,
            "element": nonroot.map(|e| e.coords().to_vec()),
        });
    }
    Ok(Outcome::Ok(doc))
}

fn cmd_poly_q(args: &Args) -> CmdResult {
    let p = args.u64("p")?;
    let l = args.u64("l")? as u32;
    let m = args.u64("m")? as u32;
    let a = load_algebra(args.require("algebra")?)?;
    let q = numtheory::frobenius_sum_defect(p, l, m, &a).map_err(|e| e.to_string())?;
    let mut doc = json!({
        "p": p,
        "l": l,
        "m": m,
        "degree": degree_json(q.degree()),
        "text": expr::print_genpoly(&q),
    });
    if let Some(at) = args.get("at") {
        let parts = split_top_level(at, ';');
        if parts.len() != 2 {
            return Err("--at needs two ';'-separated values for X and Y".into());
        }
        let x = const_element(&parts[0], &a)?;
        let y = const_element(&parts[1], &a)?;
        let value = q.eval(&[x, y]).map_err(|e| e.to_string())?;
        doc["value"] = json!(value.coords());
    }
    Ok(Outcome::Ok(doc))
}

fn cmd_classify(args: &Args) -> CmdResult {
    let n = args.u64("n")?;
    let p = args.u64("p")?;
    let params = numtheory::classify_exponent(n, p).map_err(|e| e.to_string())?;
    let doc = match params.case {
        numtheory::ExponentCase::I { k } => json!({ "case": "I", "l": params.l, "k": k }),
        numtheory::ExponentCase::II { m } => json!({ "case": "II", "l": params.l, "m": m }),
    };
    Ok(Outcome::Ok(doc))
}

fn cmd_units_generate(args: &Args) -> CmdResult {
    let a = load_algebra(args.require("algebra")?)?;
    let budget = args.budget()?;
    let generates = solver::units_additively_generate(&a, budget).map_err(|e| e.to_string())?;
    let rank = solver::unit_span_rank(&a, budget).map_err(|e| e.to_string())?;
    Ok(Outcome::Ok(json!({
        "generates": generates,
        "span_dim": rank,
        "dim": a.dim(),
    })))
}

/// Run one command; the JSON result goes to `out`, diagnostics to stderr.
pub fn run_command<W: Write>(argv: &[String], out: &mut W) -> i32 {
    match dispatch(argv) {
        Outcome::Ok(doc) => {
            writeln!(out, "{doc}").expect("write stdout");
            0
        }
        Outcome::Violated(doc) => {
            writeln!(out, "{doc}").expect("write stdout");
            1
        }
        Outcome::Usage(msg) => {
            let doc = json!({ "error": msg });
            writeln!(out, "{doc}").expect("write stdout");
            eprintln!("gpi: {msg}");
            2
        }
    }
}
