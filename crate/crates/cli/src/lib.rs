//! Command-line driver. [`run`] is pure apart from reading the input file or
//! standard input, and returns the text for both streams plus the exit code.

use clap::{Args, Parser, Subcommand, ValueEnum};
use knotcov::algebra::{alexander_polynomial, homology, LaurentPolynomial};
use knotcov::bounds::{self, BoundValue};
use knotcov::covers::{self, CoverDescriptor, FiniteHom};
use knotcov::diagram::{parse_corpus, parse_dt, parse_pd, torus_diagram, KnotDiagram};
use knotcov::presentation::{format_word, GroupPresentation};
use knotcov::spine::{spine_data, verify_standard, SpineData};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::PathBuf;

pub const SCHEMA: &str = "knotcov/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_EXHAUSTED: i32 = 2;

/// Primes tried by `cover` and `colorings` when `--p` is absent.
const SEARCH_CEILING: u64 = 13;

#[derive(Parser, Debug)]
#[command(name = "knotcov", version, about = "Spines, presentations and finite covers of knot complements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Args, Debug, Clone)]
pub struct Flags {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Prime (or field size) for colorings, representations and covers.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Search nodes allowed across all searches of one command.
    #[arg(long, global = true, default_value_t = 2_000_000)]
    pub budget: u64,
    #[arg(long, global = true)]
    pub c: Option<u64>,
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Corpus file (`<name> pd|dt|torus <code>` per line) for `report`.
    #[arg(long, global = true)]
    pub seed_corpus: Option<PathBuf>,
    /// Worker threads for parallel searches.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Wirtinger,
    Spine,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a diagram and echo its canonical PD code.
    Parse { input: Option<PathBuf> },
    /// Standard spine of the complement.
    Spine { input: Option<PathBuf> },
    /// Ideal triangulation dual to the spine.
    Triangulate { input: Option<PathBuf> },
    /// Group presentation with peripheral words.
    Presentation {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Source::Spine)]
        source: Source,
    },
    /// Alexander polynomial from both presentations.
    Alexander { input: Option<PathBuf> },
    /// First homology.
    Homology { input: Option<PathBuf> },
    /// Fox p-colorings.
    Colorings { input: Option<PathBuf> },
    /// Nonabelian representations into SL2 over the field with p elements.
    Reps {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Source::Wirtinger)]
        source: Source,
    },
    /// Search for a certified noncyclic cover.
    Cover { input: Option<PathBuf> },
    /// Sheet count for gluing piece covers.
    Assemble {
        /// Comma-separated sheet counts of the piece covers.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
    },
    /// Evaluate a bound formula.
    Bounds { quantity: Quantity },
    /// Full pipeline report.
    Report { input: Option<PathBuf> },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    A,
    B,
    D,
    LogD,
    Phi,
    Dube,
    Field,
    Sl2,
    Torus,
    Longitude,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

fn invalid(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_INVALID, message: message.to_string() }
}

type Res<T> = Result<T, Failure>;

/// Parse arguments and run. `stdin` supplies the input when no file is given.
pub fn run<I, T>(args: I, stdin: &mut (dyn FnMut() -> std::io::Result<String> + Send)) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: first_line(&text) }
            };
        }
    };
    let result = match cli.flags.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, stdin)),
            Err(e) => Err(invalid(e)),
        },
        None => dispatch(&cli, stdin),
    };
    match result {
        Ok((value, code)) => {
            let stdout = match cli.flags.format {
                Format::Json => serde_json::to_string_pretty(&value).expect("json") + "\n",
                Format::Text => render_text(&value),
            };
            let stderr = if code == EXIT_EXHAUSTED {
                "no certified noncyclic cover within the search budget\n".into()
            } else {
                String::new()
            };
            Outcome { code, stdout, stderr }
        }
        Err(f) => Outcome { code: f.code, stdout: String::new(), stderr: format!("error: {}\n", f.message) },
    }
}

fn first_line(s: &str) -> String {
    format!("{}\n", s.lines().next().unwrap_or("invalid arguments"))
}

fn read_input(path: &Option<PathBuf>, stdin: &mut (dyn FnMut() -> std::io::Result<String> + Send)) -> Res<String> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => stdin().map_err(|e| invalid(format!("stdin: {e}"))),
    }
}

/// Accepts a PD code, a DT code, `torus u v`, or a single corpus-style line
/// `pd|dt|torus <code>`.
pub fn parse_diagram(text: &str) -> Result<KnotDiagram, String> {
    let body: String = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join(" ");
    let body = body.trim();
    let (kind, code) = match body.split_once(char::is_whitespace) {
        Some((k @ ("pd" | "dt" | "torus"), rest)) => (k, rest.trim()),
        _ if body.contains('X') || body.contains('[') => ("pd", body),
        _ => ("dt", body),
    };
    match kind {
        "pd" => parse_pd(code).map_err(|e| e.to_string()),
        "dt" => parse_dt(code).map_err(|e| e.to_string()),
        _ => {
            let nums: Vec<u32> = code
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u32>().map_err(|_| format!("bad torus parameter {s:?}")))
                .collect::<Result<_, _>>()?;
            match nums[..] {
                [u, v] => torus_diagram(u, v).map_err(|e| e.to_string()),
                _ => Err("torus input needs two parameters".into()),
            }
        }
    }
}

fn diagram(path: &Option<PathBuf>, stdin: &mut (dyn FnMut() -> std::io::Result<String> + Send)) -> Res<KnotDiagram> {
    parse_diagram(&read_input(path, stdin)?).map_err(invalid)
}

fn envelope(command: &str, body: Value) -> Value {
    let mut v = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    v
}

fn dispatch(cli: &Cli, stdin: &mut (dyn FnMut() -> std::io::Result<String> + Send)) -> Res<(Value, i32)> {
    let f = &cli.flags;
    let ok = |name: &str, body: Value| Ok((envelope(name, body), EXIT_OK));
    match &cli.command {
        Command::Parse { input } => ok("parse", diagram_json(&diagram(input, stdin)?)),
        Command::Spine { input } => {
            let d = diagram(input, stdin)?;
            let sd = spine_data(&d).map_err(invalid)?;
            ok("spine", spine_json(&d, &sd, true))
        }
        Command::Triangulate { input } => {
            let sd = spine_data(&diagram(input, stdin)?).map_err(invalid)?;
            ok("triangulate", triangulation_json(&sd, true))
        }
        Command::Presentation { input, source } => {
            let d = diagram(input, stdin)?;
            let p = match source {
                Source::Wirtinger => d.wirtinger_presentation(),
                Source::Spine => spine_data(&d).map_err(invalid)?.presentation,
            };
            ok("presentation", json!({ "source": source_name(*source), "presentation": presentation_json(&p, true) }))
        }
        Command::Alexander { input } => {
            let d = diagram(input, stdin)?;
            let sd = spine_data(&d).ok();
            ok("alexander", alexander_json(&d, sd.as_ref())?)
        }
        Command::Homology { input } => {
            let d = diagram(input, stdin)?;
            let sd = spine_data(&d).ok();
            ok("homology", homology_json(&d, sd.as_ref()))
        }
        Command::Colorings { input } => {
            let d = diagram(input, stdin)?;
            let primes = candidate_primes(f.p)?;
            ok("colorings", json!({ "colorings": colorings_json(&d, &primes)? }))
        }
        Command::Reps { input, source } => {
            let d = diagram(input, stdin)?;
            let q = f.p.ok_or_else(|| invalid("reps needs --p"))?;
            let p = match source {
                Source::Wirtinger => d.wirtinger_presentation(),
                Source::Spine => spine_data(&d).map_err(invalid)?.presentation,
            };
            let r = covers::sl2_rep_search(&p, q, f.budget).map_err(invalid)?;
            let code = if r.homs.is_empty() && !r.complete { EXIT_EXHAUSTED } else { EXIT_OK };
            let homs: Vec<Value> = r.homs.iter().map(hom_json).collect();
            Ok((
                envelope(
                    "reps",
                    json!({
                        "source": source_name(*source),
                        "q": q,
                        "complete": r.complete,
                        "nodes": r.nodes,
                        "count": homs.len(),
                        "representations": homs,
                    }),
                ),
                code,
            ))
        }
        Command::Cover { input } => {
            let d = diagram(input, stdin)?;
            let (body, code) = cover_search(&d, f.p, f.budget)?;
            Ok((envelope("cover", body), code))
        }
        Command::Assemble { m } => {
            let p = f.p.ok_or_else(|| invalid("assemble needs --p"))?;
            let plan = covers::assemble(m, p).map_err(invalid)?;
            ok("assemble", json!({ "plan": plan }))
        }
        Command::Bounds { quantity } => ok("bounds", bounds_json(*quantity, f)?),
        Command::Report { input } => {
            if let Some(path) = &f.seed_corpus {
                let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                let corpus = parse_corpus(&text).map_err(invalid)?;
                let reports: Vec<Res<Value>> = corpus
                    .par_iter()
                    .map(|(name, d)| {
                        let mut r = report_json(d, f)?;
                        r["name"] = json!(name);
                        Ok(r)
                    })
                    .collect();
                let reports = reports.into_iter().collect::<Res<Vec<_>>>()?;
                ok("report", json!({ "corpus": reports }))
            } else {
                let d = diagram(input, stdin)?;
                ok("report", report_json(&d, f)?)
            }
        }
    }
}

fn source_name(s: Source) -> &'static str {
    match s {
        Source::Wirtinger => "wirtinger",
        Source::Spine => "spine",
    }
}

fn diagram_json(d: &KnotDiagram) -> Value {
    json!({
        "crossings": d.crossing_count(),
        "writhe": d.writhe(),
        "pd": d.emit_pd(),
    })
}

fn spine_json(d: &KnotDiagram, sd: &SpineData, full: bool) -> Value {
    let initial = verify_standard(&sd.initial);
    let standard = verify_standard(&sd.spine);
    let mut v = json!({
        "crossings": d.crossing_count(),
        "initial": {
            "vertices": initial.vertices,
            "edges": initial.edges,
            "faces": initial.faces,
            "euler_characteristic": initial.euler_characteristic,
        },
        "standard": standard,
    });
    if full {
        v["complex"] = sd.spine.to_json();
    }
    v
}

fn triangulation_json(sd: &SpineData, full: bool) -> Value {
    let t = &sd.triangulation;
    let mut v = json!({
        "tetrahedra": t.tetrahedra(),
        "face_pairs": t.face_pairs().len(),
        "consistent": t.is_consistent(),
        "orientable": t.is_orientable(),
    });
    if full {
        v["gluings"] = json!(t.gluing_table().lines().collect::<Vec<_>>());
    }
    v
}

fn presentation_json(p: &GroupPresentation, full: bool) -> Value {
    let mut v = json!({
        "generators": p.generator_count,
        "relators": p.relators.len(),
        "total_length": p.total_relator_length(),
    });
    if full {
        v["words"] = json!(p.relators.iter().map(|r| format_word(r)).collect::<Vec<_>>());
        if let Some(per) = &p.peripheral {
            v["peripheral"] = json!({
                "x": format_word(&per.x),
                "y": format_word(&per.y),
                "longitude": format_word(&per.longitude),
                "meridian_image": [per.a, per.b],
            });
        }
    }
    v
}

fn poly_json(p: &LaurentPolynomial) -> Value {
    json!({ "text": p.to_string(), "terms": p.to_json(), "degree": p.span() })
}

fn alexander_json(d: &KnotDiagram, sd: Option<&SpineData>) -> Res<Value> {
    let w = alexander_polynomial(&d.wirtinger_presentation()).map_err(invalid)?;
    let det = w.eval_normal(-1);
    let mut v = json!({ "wirtinger": poly_json(&w), "determinant": det.magnitude().to_string() });
    if let Some(sd) = sd {
        let s = alexander_polynomial(&sd.presentation).map_err(invalid)?;
        v["agree"] = json!(s.unit_equivalent(&w));
        v["spine"] = poly_json(&s);
    }
    Ok(v)
}

fn homology_json(d: &KnotDiagram, sd: Option<&SpineData>) -> Value {
    let mut v = json!({ "wirtinger": homology(&d.wirtinger_presentation()).to_string() });
    if let Some(sd) = sd {
        v["spine"] = json!(homology(&sd.presentation).to_string());
    }
    v
}

fn candidate_primes(p: Option<u64>) -> Res<Vec<u64>> {
    match p {
        Some(p) if bounds::is_prime_u64(p) => Ok(vec![p]),
        Some(p) => Err(invalid(format!("{p} is not prime"))),
        None => {
            let mut out: Vec<u64> = Vec::new();
            let mut excluded = Vec::new();
            while let Ok(q) = bounds::prime_outside(SEARCH_CEILING, &excluded) {
                out.push(q);
                excluded.push(q.into());
            }
            Ok(out)
        }
    }
}

fn colorings_json(d: &KnotDiagram, primes: &[u64]) -> Res<Vec<Value>> {
    primes
        .iter()
        .filter(|&&p| p > 2)
        .map(|&p| {
            let h = covers::pcoloring_cover(d, p).map_err(invalid)?;
            Ok(json!({
                "p": p,
                "colorable": h.is_some(),
                "colors": h.map(|h| h.images.iter().map(|c| c[0]).collect::<Vec<_>>()),
            }))
        })
        .collect()
}

fn hom_json(h: &FiniteHom) -> Value {
    json!({
        "target": h.target,
        "images": h.images,
        "image_order": h.image_order,
        "certificate": h.certificate(),
        "peripheral_orders": h.peripheral,
    })
}

fn descriptor_json(c: &CoverDescriptor, strategy: &str, p: u64) -> Value {
    json!({ "strategy": strategy, "p": p, "descriptor": c })
}

/// Colorings, then θ alone (always cyclic for a knot), then SL2 searches
/// over ascending primes paired with θ.
fn cover_search(d: &KnotDiagram, p: Option<u64>, budget: u64) -> Res<(Value, i32)> {
    let primes = candidate_primes(p)?;
    let pres = d.wirtinger_presentation();
    let mut attempts = Vec::new();
    for &q in primes.iter().filter(|&&q| q > 2) {
        let h = covers::pcoloring_cover(d, q).map_err(invalid)?;
        attempts.push(json!({ "strategy": "coloring", "p": q, "result": if h.is_some() { "found" } else { "none" } }));
        if let Some(h) = h {
            let c = CoverDescriptor::from_hom(&h);
            let body = json!({ "input": diagram_json(d), "attempts": attempts, "cover": descriptor_json(&c, "coloring", q) });
            return Ok((body, EXIT_OK));
        }
    }
    let q0 = primes[0];
    let theta0 = covers::theta_hom(&pres, q0).map_err(invalid)?;
    attempts.push(json!({
        "strategy": "theta",
        "p": q0,
        "result": "rejected",
        "certificate": theta0.certificate(),
        "sheets": theta0.image_order,
    }));
    let mut remaining = budget;
    let mut exhausted = false;
    for &q in &primes {
        if remaining == 0 {
            exhausted = true;
            break;
        }
        let r = covers::sl2_rep_search(&pres, q, remaining).map_err(invalid)?;
        remaining = remaining.saturating_sub(r.nodes);
        exhausted |= !r.complete;
        attempts.push(json!({
            "strategy": "sl2",
            "p": q,
            "result": if r.homs.is_empty() { if r.complete { "none" } else { "exhausted" } } else { "found" },
            "nodes": r.nodes,
        }));
        if let Some(rho) = r.homs.first() {
            let theta = covers::theta_hom(&pres, q).map_err(invalid)?;
            let c = covers::product_cover(rho, &theta).map_err(invalid)?;
            let body = json!({ "input": diagram_json(d), "attempts": attempts, "cover": descriptor_json(&c, "sl2_x_theta", q) });
            return Ok((body, EXIT_OK));
        }
    }
    let body = json!({ "input": diagram_json(d), "attempts": attempts, "cover": null, "exhausted": exhausted });
    Ok((body, EXIT_EXHAUSTED))
}

fn bound_json(quantity: &str, v: &BoundValue) -> Value {
    json!({
        "quantity": quantity,
        "sign": if v.is_negative() { "-" } else { "+" },
        "level": v.level(),
        "mantissa": v.mantissa_digits(40),
        "decimal_rendering_when_level0": v.decimal(40),
    })
}

fn need(x: Option<u64>, flag: &str) -> Res<u64> {
    x.ok_or_else(|| invalid(format!("this quantity needs --{flag}")))
}

fn bounds_json(q: Quantity, f: &Flags) -> Res<Value> {
    let e = |r: Result<BoundValue, bounds::BoundError>| r.map_err(invalid);
    Ok(match q {
        Quantity::A => {
            let n = need(f.n, "n")?;
            let mut v = bound_json(&format!("A({n})"), &e(bounds::a_value(n))?);
            if n * n <= bounds::EXACT_FACTORIAL_LIMIT {
                v["exact"] = json!(bounds::a_of(n).map_err(invalid)?.to_string());
            }
            v
        }
        Quantity::B => {
            let n = need(f.n, "n")?;
            let mut v = bound_json(&format!("B({n})"), &e(bounds::b_value(n))?);
            v["exact"] = json!(bounds::b_of(n).map_err(invalid)?.to_string());
            v
        }
        Quantity::D => {
            let n = need(f.n, "n")?;
            bound_json(&format!("D({n})"), &e(bounds::d_of(n))?)
        }
        Quantity::LogD => {
            let n = need(f.n, "n")?;
            bound_json(&format!("log D({n})"), &bounds::d_terms(n).map_err(invalid)?.log_d)
        }
        Quantity::Phi => {
            let c = need(f.c, "c")?;
            let t = bounds::phi_terms(c).map_err(invalid)?;
            let mut v = bound_json(&format!("Phi({c})"), &t.phi);
            v["n"] = json!(100 * c);
            v["base"] = bound_json("base", &t.base);
            v["exponent"] = bound_json("exponent", &t.exponent);
            v
        }
        Quantity::Dube => {
            let n = need(f.n, "n")?;
            bound_json(&format!("dube_degree({n})"), &e(bounds::dube_degree_bound(n))?)
        }
        Quantity::Field => {
            let n = need(f.n, "n")?;
            bound_json(&format!("field_degree({n})"), &e(bounds::field_degree_bound(n))?)
        }
        Quantity::Sl2 => {
            let p = need(f.p, "p")?;
            match f.n {
                Some(n) => bound_json(&format!("sl2_size({p}, {n})"), &e(bounds::sl2_size_bound(p, n))?),
                None => {
                    let order = bounds::sl2_order(p);
                    json!({
                        "quantity": format!("|SL2(F_{p})|"),
                        "order": order.to_string(),
                        "cube_bound": (p as u128).pow(3).to_string(),
                    })
                }
            }
        }
        Quantity::Torus => {
            let c = need(f.c, "c")?;
            match bounds::torus_uv_bound(c).map_err(invalid)? {
                bounds::TorusUvBound::Exact(v) => json!({ "quantity": format!("uv({c})"), "exact": v.to_string() }),
                bounds::TorusUvBound::Approx(v) => bound_json(&format!("uv({c})"), &v),
            }
        }
        Quantity::Longitude => {
            let n = need(f.n, "n")?;
            json!({ "quantity": format!("16n^2 3^(n-1) at n = {n}"), "exact": bounds::longitude_coefficient_bound(n).to_string() })
        }
    })
}

fn report_json(d: &KnotDiagram, f: &Flags) -> Res<Value> {
    let sd = spine_data(d);
    let mut warnings: Vec<String> = Vec::new();
    let mut v = json!({ "input": diagram_json(d) });
    match &sd {
        Ok(sd) => {
            v["spine"] = spine_json(d, sd, false);
            v["triangulation"] = triangulation_json(sd, false);
        }
        Err(e) => warnings.push(format!("spine: {e}")),
    }
    let sdo = sd.as_ref().ok();
    v["presentation"] = json!({
        "wirtinger": presentation_json(&d.wirtinger_presentation(), false),
        "spine": sdo.map(|s| presentation_json(&s.presentation, false)),
    });
    v["homology"] = homology_json(d, sdo);
    v["alexander"] = alexander_json(d, sdo)?;
    v["colorings"] = json!(colorings_json(d, &candidate_primes(None)?)?);
    let (cover, code) = cover_search(d, f.p, f.budget)?;
    v["cover"] = cover["cover"].clone();
    if code == EXIT_EXHAUSTED {
        warnings.push("no certified noncyclic cover found".into());
    }
    let c = d.crossing_count() as u64;
    let mut b = json!({ "c": c, "phi": bound_json(&format!("Phi({c})"), &bounds::phi_of(c).map_err(invalid)?) });
    if let Some(sd) = sdo {
        let n = sd.spine.vertex_count() as u64;
        b["n"] = json!(n);
        b["d"] = bound_json(&format!("D({n})"), &bounds::d_of(n).map_err(invalid)?);
        b["longitude_coefficients"] = json!(bounds::longitude_coefficient_bound(n).to_string());
    }
    v["bounds"] = b;
    v["warnings"] = json!(warnings);
    Ok(v)
}

/// Indented `key: value` rendering of a JSON value.
pub fn render_text(v: &Value) -> String {
    fn walk(v: &Value, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    match x {
                        Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            walk(x, indent + 1, out);
                        }
                        _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                    }
                }
            }
            Value::Array(a) => {
                for x in a {
                    if is_flat(x) {
                        out.push_str(&format!("{pad}- {}\n", scalar(x)));
                    } else {
                        out.push_str(&format!("{pad}-\n"));
                        walk(x, indent + 1, out);
                    }
                }
            }
            x => out.push_str(&format!("{pad}{}\n", scalar(x))),
        }
    }
    fn is_flat(v: &Value) -> bool {
        match v {
            Value::Array(a) => a.iter().all(|x| !x.is_object() && !x.is_array()),
            Value::Object(_) => false,
            _ => true,
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            Value::Array(a) => a.iter().map(scalar).collect::<Vec<_>>().join(" "),
            x => x.to_string(),
        }
    }
    let mut out = String::new();
    walk(v, 0, &mut out);
    out
}
