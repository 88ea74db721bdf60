//! Command-line front end: build, check, chevalley, realize, extract,
//! compare, audit. Exit code 0 on success, 1 on an audit violation, 2 on a
//! usage or input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::chevalley::{self, json as cjson, ConstantsTable, Signs, TotalOrder};
use crate::compare;
use crate::num::{self, Q};
use crate::realize::{self, ModelKind};
use crate::rootsys::{self, json as rjson, Family, Report, RootSupersystem, TypeDescriptor};

/// Environment variable naming the directory for relative `--out` paths.
pub const OUT_DIR_ENV: &str = "SUPERROOTS_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "superroots", version, about = "Root supersystems, Chevalley constants and matrix models")]
struct Cli {
    /// Suppress reports; the exit code stays authoritative.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Build a root supersystem (rootsys.v1).
    Build {
        /// Family name, or a letter B, C, D, BC, A with two ranks.
        #[arg(long)]
        family: Option<String>,
        #[arg(long, value_delimiter = ',')]
        ranks: Option<Vec<u32>>,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Axiom report for a rootsys.v1 file, or closure checks for a model.v1 file.
    Check { input: PathBuf },
    /// Structure constants from uniform seeds (constants.v1).
    Chevalley {
        input: PathBuf,
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        scale: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Matrix model (model.v1).
    Realize {
        /// osp-odd, osp-even or sl.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long = "I", value_delimiter = ',')]
        i: Option<Vec<u32>>,
        #[arg(long = "J", value_delimiter = ',')]
        j: Option<Vec<u32>>,
        /// Embed the abstract structure table.
        #[arg(long)]
        with_algebra: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constants read off a matrix model (constants.v1).
    Extract {
        input: PathBuf,
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        scale: Option<String>,
        /// Use the order, seeds and scale of this constants file, carried
        /// over by a root isomorphism, and report in its coordinates.
        #[arg(long = "match")]
        matching: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact equality of two constants files, or the conjugacy verdict for
    /// two rootsys files.
    Compare { a: PathBuf, b: PathBuf },
    /// Constant identities for a constants.v1 file.
    Audit { input: PathBuf },
}

enum Failure {
    Usage(String),
    Violation(String),
}

type Res<T> = Result<T, Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

struct Ctx<'a> {
    quiet: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    /// Standard output carries a JSON document; messages go to stderr.
    json_on_stdout: bool,
}

impl Ctx<'_> {
    fn say(&mut self, s: &str) {
        if self.quiet {
            return;
        }
        let w: &mut dyn Write = if self.json_on_stdout { &mut *self.err } else { &mut *self.out };
        let _ = writeln!(w, "{}", s);
    }

    /// Writes JSON to `path` (relative to the output directory variable if
    /// set), or to standard output when no path is given.
    fn emit(&mut self, v: &Value, path: &Option<PathBuf>) -> Res<()> {
        let text = canonical(v);
        match path {
            Some(p) => {
                let p = resolve_out(p);
                std::fs::write(&p, text).map_err(|e| usage(format!("{}: {}", p.display(), e)))?;
                self.say(&format!("wrote {}", p.display()));
            }
            None => {
                let _ = self.out.write_all(text.as_bytes());
                self.json_on_stdout = true;
            }
        }
        Ok(())
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn resolve_out(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(d) if p.is_relative() => Path::new(&d).join(p),
        _ => p.to_path_buf(),
    }
}

fn read_json(p: &Path) -> Res<Value> {
    let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {}", p.display(), e)))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {}", p.display(), e)))
}

fn config(p: &Option<PathBuf>) -> Res<Value> {
    match p {
        Some(p) => read_json(p),
        None => Ok(Value::Null),
    }
}

fn cfg_str(c: &Value, k: &str) -> Option<String> {
    match c.get(k)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn cfg_list(c: &Value, k: &str) -> Option<Vec<u32>> {
    c.get(k)?.as_array()?.iter().map(|x| x.as_u64().map(|y| y as u32)).collect()
}

fn rational(s: &str, what: &str) -> Res<Q> {
    num::parse_q(s).ok_or_else(|| usage(format!("{} must be a rational number, got {:?}", what, s)))
}

fn descriptor(family: &str, ranks: &[u32], lambda: Option<Q>) -> Res<TypeDescriptor> {
    let d = if ranks.len() == 2 && ["B", "C", "D", "BC", "A"].contains(&family) {
        TypeDescriptor::super_mn(family, ranks[0], ranks[1]).map_err(usage)?
    } else {
        let f = Family::from_name(family).ok_or_else(|| usage(format!("unknown family {:?}", family)))?;
        TypeDescriptor { family: f, ranks: ranks.to_vec(), lambda: None }
    };
    let d = match (d.family, lambda) {
        (Family::D21, Some(l)) => TypeDescriptor::d21(l),
        (_, None) => d,
        (_, Some(_)) => return Err(usage("--lambda applies to D(2,1,lambda) only")),
    };
    d.validate().map_err(usage)?;
    Ok(d)
}

fn load_rootsys(p: &Path) -> Res<RootSupersystem> {
    rjson::rootsys_from_json(&read_json(p)?).ok_or_else(|| usage(format!("{}: not a rootsys.v1 document", p.display())))
}

fn load_constants(p: &Path) -> Res<(RootSupersystem, ConstantsTable)> {
    cjson::constants_from_json(&read_json(p)?).ok_or_else(|| usage(format!("{}: not a constants.v1 document", p.display())))
}

fn report_lines(ctx: &mut Ctx, name: &str, rep: &Report) {
    ctx.say(&format!("{}: {} checks, {} violations", name, rep.checked, rep.violations.len()));
    for v in rep.violations.iter().take(10) {
        ctx.say(&format!("  {} {}", v.axiom, v.witness));
    }
}

fn seeds_and_scale(seeds: &Option<String>, scale: &Option<String>, c: &Value) -> Res<(Q, Q)> {
    let s = seeds.clone().or_else(|| cfg_str(c, "seeds")).unwrap_or_else(|| "1".into());
    let r = scale.clone().or_else(|| cfg_str(c, "scale")).unwrap_or_else(|| "1".into());
    let (s, r) = (rational(&s, "--seeds")?, rational(&r, "--scale")?);
    if num::sign(&s) == 0 || num::sign(&r) == 0 {
        return Err(usage("seeds and scale must be nonzero"));
    }
    Ok((s, r))
}

fn execute(verb: Verb, ctx: &mut Ctx) -> Res<()> {
    match verb {
        Verb::Build { family, ranks, lambda, config: cf, out } => {
            let c = config(&cf)?;
            let family = family.or_else(|| cfg_str(&c, "family")).ok_or_else(|| usage("--family is required"))?;
            let ranks = ranks.or_else(|| cfg_list(&c, "ranks")).ok_or_else(|| usage("--ranks is required"))?;
            let lambda = match lambda.or_else(|| cfg_str(&c, "lambda")) {
                Some(l) => Some(rational(&l, "--lambda")?),
                None => None,
            };
            let d = descriptor(&family, &ranks, lambda)?;
            let r = rootsys::build(&d).map_err(usage)?;
            ctx.emit(&rjson::rootsys_to_json(&r), &out)?;
            ctx.say(&format!("{}: {} nonzero roots", d, r.nonzero().count()));
            Ok(())
        }
        Verb::Check { input } => {
            let v = read_json(&input)?;
            match v.get("schema").and_then(|s| s.as_str()) {
                Some("rootsys.v1") => check_rootsys(&load_rootsys(&input)?, ctx),
                Some("model.v1") => check_model(&v, ctx),
                _ => Err(usage(format!("{}: expected a rootsys.v1 or model.v1 document", input.display()))),
            }
        }
        Verb::Chevalley { input, seeds, scale, config: cf, out } => {
            let c = config(&cf)?;
            let (seed, r_scale) = seeds_and_scale(&seeds, &scale, &c)?;
            let r = load_rootsys(&input)?;
            let order = TotalOrder::standard(&r);
            let s = Signs::new(&r, &order).map_err(usage)?;
            let t = chevalley::constants_from_seeds(&r, &order, &chevalley::uniform_seeds(&s, &seed), &r_scale).map_err(usage)?;
            ctx.emit(&cjson::constants_to_json(&r, &t), &out)?;
            ctx.say(&format!("{} constants, {} extraspecial seeds", t.n.len(), t.seeds.len()));
            Ok(())
        }
        Verb::Realize { kind, i, j, with_algebra, config: cf, out } => {
            let c = config(&cf)?;
            let kind = kind.or_else(|| cfg_str(&c, "kind")).ok_or_else(|| usage("--kind is required"))?;
            let kind = ModelKind::from_name(&kind).ok_or_else(|| usage(format!("unknown kind {:?}", kind)))?;
            let i = i.or_else(|| cfg_list(&c, "I")).unwrap_or_default();
            let j = j.or_else(|| cfg_list(&c, "J")).unwrap_or_default();
            let m = realize::build_model(kind, &i, &j).map_err(usage)?;
            ctx.emit(&m.to_json(with_algebra).map_err(usage)?, &out)?;
            ctx.say(&format!("{} model of dimension {}", kind.name(), m.dim()));
            for a in &m.audit {
                ctx.say(&format!("  row {}: printed {} ({}), using {}", a.root, a.printed, a.failure, a.replacement));
            }
            Ok(())
        }
        Verb::Extract { input, seeds, scale, matching, config: cf, out } => {
            let c = config(&cf)?;
            let m = realize::MatrixModel::from_json(&read_json(&input)?)
                .ok_or_else(|| usage(format!("{}: not a model.v1 document", input.display())))?
                .map_err(usage)?;
            let (r, t) = match matching {
                Some(p) => {
                    let (r, t) = load_constants(&p)?;
                    let f = rootsys::is_isomorphic(&r, &m.rootsys)
                        .ok_or_else(|| usage("the model's root system is not isomorphic to the reference"))?;
                    let (o, s, sc) = compare::transported_inputs(&m.rootsys, &t, &f).map_err(usage)?;
                    let x = realize::extract_constants(&m, &o, &s, &sc).map_err(usage)?;
                    let back = compare::transport_table(&r, &x, &f.inverse().ok_or_else(|| usage("singular root map"))?)
                        .map_err(usage)?;
                    let table = ConstantsTable { n: back.n, ..t };
                    (r, table)
                }
                None => {
                    let (seed, r_scale) = seeds_and_scale(&seeds, &scale, &c)?;
                    let order = TotalOrder::standard(&m.rootsys);
                    let s = Signs::new(&m.rootsys, &order).map_err(usage)?;
                    let seeds = chevalley::uniform_seeds(&s, &seed);
                    let t = realize::extract_constants(&m, &order, &seeds, &r_scale).map_err(usage)?;
                    (m.rootsys.clone(), t)
                }
            };
            ctx.emit(&cjson::constants_to_json(&r, &t), &out)?;
            ctx.say(&format!("{} constants read from the model", t.n.len()));
            Ok(())
        }
        Verb::Compare { a, b } => {
            let (va, vb) = (read_json(&a)?, read_json(&b)?);
            if va["schema"] == "rootsys.v1" && vb["schema"] == "rootsys.v1" {
                let (ra, rb) = (load_rootsys(&a)?, load_rootsys(&b)?);
                return match compare::conjugacy_verdict(&ra, &rb) {
                    compare::Verdict::Conjugate(f) => {
                        ctx.say(&format!("conjugate (form ratio {})", num::fmt_q(&f.k)));
                        Ok(())
                    }
                    compare::Verdict::NotConjugate => Err(Failure::Violation("not conjugate: root systems are not isomorphic".into())),
                };
            }
            let (ra, ta) = load_constants(&a)?;
            let (rb, tb) = load_constants(&b)?;
            let (ja, jb) = (canonical(&cjson::constants_to_json(&ra, &ta)), canonical(&cjson::constants_to_json(&rb, &tb)));
            if ja == jb {
                ctx.say("identical");
                return Ok(());
            }
            if ra != rb {
                return Err(Failure::Violation("root systems differ".into()));
            }
            let diffs = compare::table_differences(&ta, &tb);
            for (x, y, u, v) in diffs.iter().take(10) {
                ctx.say(&format!("  N({}, {}): {} vs {}", ra.render(x), ra.render(y), num::fmt_q(u), num::fmt_q(v)));
            }
            Err(Failure::Violation(format!("{} constants differ; order, seeds or scale may differ too", diffs.len())))
        }
        Verb::Audit { input } => {
            let (r, t) = load_constants(&input)?;
            let rep = chevalley::verify_constants(&r, &t);
            report_lines(ctx, "constant identities", &rep);
            if rep.passed() {
                Ok(())
            } else {
                Err(Failure::Violation("constant identities fail".into()))
            }
        }
    }
}

fn check_rootsys(r: &RootSupersystem, ctx: &mut Ctx) -> Res<()> {
    let rep = r.check_axioms();
    report_lines(ctx, "axioms", &rep);
    let mut ok = rep.passed();
    match rootsys::recognize(r) {
        Ok(d) => ctx.say(&format!("type: {}", d)),
        Err(e) => ctx.say(&format!("type: unrecognized ({})", e)),
    }
    let fam = r.descriptor.as_ref().map(|d| d.family);
    if matches!(fam, Some(Family::CTT | Family::BCTT | Family::C1T)) {
        match rootsys::rem3_nonroot_audit(r) {
            Ok(a) => {
                report_lines(ctx, "non-root audit", &a.report);
                ok &= a.report.passed();
            }
            Err(e) => ctx.say(&format!("non-root audit not applicable: {}", e)),
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Violation("root system audit failed".into()))
    }
}

fn check_model(v: &Value, ctx: &mut Ctx) -> Res<()> {
    let m = realize::MatrixModel::from_json(v).ok_or_else(|| usage("bad model.v1 document"))?.map_err(usage)?;
    let a = m.to_abstract().map_err(usage)?;
    let jac = a.jacobi_check();
    let form = a.form_check(None);
    report_lines(ctx, "jacobi", &jac);
    report_lines(ctx, "form", &form);
    let simple = a.is_simple();
    ctx.say(&format!("dimension {}, simple {}, even-part center dimension {}", a.dim(), simple, a.center_of_even_part().len()));
    if jac.passed() && form.passed() && simple {
        Ok(())
    } else {
        Err(Failure::Violation("model audit failed".into()))
    }
}

/// Runs one command; returns the exit code.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{}", text);
            } else {
                let _ = write!(err, "{}", text);
            }
            return code;
        }
    };
    let mut ctx = Ctx { quiet: cli.quiet, out, err, json_on_stdout: false };
    match execute(cli.verb, &mut ctx) {
        Ok(()) => 0,
        Err(Failure::Violation(m)) => {
            let _ = writeln!(ctx.err, "violation: {}", m);
            1
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(ctx.err, "error: {}", m);
            2
        }
    }
}
