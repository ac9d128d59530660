//! `tripc`: JSON front end for tripc-core.
//!
//! Every subcommand prints one JSON document on stdout. Exit codes: 0 for
//! success or a true verdict, 1 for a false or undecided verdict, 2 for input
//! errors, 3 for internal inconsistencies.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use tripc_core::conelab::{self, CompletenessOptions, OrderedSpace};
use tripc_core::instance::random_instance;
use tripc_core::peirce::{self, PeirceAlgebra};
use tripc_core::report::ConeReport;
use tripc_core::subspace::Subspace;
use tripc_core::suite::{self, OrderFixture, SuiteConfig};
use tripc_core::tripotent::{self, InfFamilyOptions, Tripotent};
use tripc_core::tro::TroSpace;
use tripc_core::{CMatrix, Error, Result, TolerancePolicy};

#[derive(Parser, Debug)]
#[command(name = "tripc", version, about = "Tripotents, TROs and their cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TroSpace JSON file; repeat for commands taking several spaces.
    #[arg(long, global = true)]
    space: Vec<PathBuf>,
    /// Matrix, list of matrices, or ordered space, depending on the command.
    #[arg(long, global = true)]
    x: Option<PathBuf>,
    /// Tripotent JSON, or a bare matrix of the first --space. Repeatable.
    #[arg(long, global = true)]
    u: Vec<PathBuf>,
    #[arg(long, global = true)]
    v: Option<PathBuf>,

    #[arg(long, global = true, default_value = "all")]
    suite: String,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, default_value_t = 4)]
    dim_max: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Replay one order fixture through the order-equivalence checks.
    #[arg(long, global = true)]
    fixture: Option<PathBuf>,

    #[arg(long, global = true, env = "TRIPC_TOL_EQ")]
    tol_eq: Option<f64>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_one: Option<f64>,

    /// Matrix level or block count.
    #[arg(long, global = true)]
    amplify: Option<usize>,
    /// Spectral window for `spectral`.
    #[arg(long, global = true)]
    lo: Option<f64>,
    #[arg(long, global = true)]
    hi: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Smallest TRO containing the --x generators, or a seeded random TRO.
    GenTro,
    Contains,
    /// The C*-part J(Z).
    JAlg,
    /// Membership of --x in the natural cone Z ∩ PSD.
    ConeTest,
    /// Linking algebra data, with inject/theta of --x when given.
    Link,
    /// Quotient of --space by the ternary ideal spanned by --x.
    Quotient,
    /// Direct sum of all --space arguments.
    Sum,
    /// Validates --u (or --x) as a tripotent of --space.
    Tripotent,
    Leq,
    Hat,
    Sup,
    SupExists,
    /// Infimum of commuting --u and --v.
    Inf,
    /// Infimum of all --u tripotents.
    InfFamily,
    Amplify,
    /// Openness of --u relative to the subTRO given by the last --space.
    Open,
    Maximal,
    /// Peirce 2-space of --u; cone membership of --x when given.
    Peirce,
    Range,
    Limit,
    Spectral,
    /// Support tripotent of the inner ideal spanned by --x.
    Support,
    HatElem,
    BlockBounds,
    /// Annihilator in --space of the matrices in --x.
    Annihilator,
    CentralMax,
    Probe,
    BoundaryCone,
    BkCheck,
    Completeness,
    DecomposeProj,
    Verify,
}

/// What a command produced: a document and whether it counts as success.
struct Outcome {
    doc: Value,
    ok: bool,
}

impl Outcome {
    fn success(doc: Value) -> Self {
        Self { doc, ok: true }
    }

    fn verdict(verdict: bool, mut doc: Value) -> Self {
        doc["verdict"] = json!(verdict);
        Self { doc, ok: verdict }
    }

    fn report(report: &ConeReport) -> Self {
        Self {
            doc: to_value(report),
            ok: report.verdict == Some(true),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.doc).expect("JSON output"));
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            let doc = json!({"error": e.kind(), "message": e.to_string()});
            println!("{}", serde_json::to_string_pretty(&doc).expect("JSON output"));
            eprintln!("tripc: {e}");
            ExitCode::from(if e.is_internal_inconsistency() { 3 } else { 2 })
        }
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable output")
}

fn input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| input(format!("bad {what}: {e}")))
}

/// A TroSpace, or any object carrying one under `"space"`.
fn space_from(v: Value) -> Result<TroSpace> {
    match v.get("space") {
        Some(s) if v.get("basis").is_none() => parse(s.clone(), "space"),
        _ => parse(v, "space"),
    }
}

/// A matrix, or a tripotent object carrying one under `"u"`.
fn matrix_from(v: Value) -> Result<CMatrix> {
    match v.get("u") {
        Some(u) if v.get("rows").is_none() => parse(u.clone(), "matrix"),
        _ => parse(v, "matrix"),
    }
}

/// An array of matrices, a single matrix, or an object with `"basis"`.
fn matrices_from(v: Value) -> Result<Vec<CMatrix>> {
    match v {
        Value::Array(items) => items.into_iter().map(matrix_from).collect(),
        Value::Object(ref o) if o.contains_key("basis") => parse(o["basis"].clone(), "basis"),
        other => Ok(vec![matrix_from(other)?]),
    }
}

fn tolerance(cli: &Cli) -> Result<TolerancePolicy> {
    let mut tol = TolerancePolicy::default();
    if let Some(e) = cli.tol_eq {
        tol = tol.with_eq_tol(e);
    }
    if let Some(e) = cli.tol_rank {
        tol = tol.with_rank_tol(e);
    }
    if let Some(e) = cli.tol_one {
        tol = tol.with_one_tol(e);
    }
    Ok(tol)
}

struct Ctx<'a> {
    cli: &'a Cli,
    tol: TolerancePolicy,
}

impl Ctx<'_> {
    fn spaces(&self) -> Result<Vec<TroSpace>> {
        self.cli.space.iter().map(|p| space_from(read_json(p)?)).collect()
    }

    fn space(&self) -> Result<Arc<TroSpace>> {
        let path = self.cli.space.first().ok_or_else(|| input("--space is required"))?;
        Ok(Arc::new(space_from(read_json(path)?)?))
    }

    fn x_value(&self) -> Result<Value> {
        read_json(self.cli.x.as_deref().ok_or_else(|| input("--x is required"))?)
    }

    fn x(&self) -> Result<CMatrix> {
        matrix_from(self.x_value()?)
    }

    fn xs(&self) -> Result<Vec<CMatrix>> {
        matrices_from(self.x_value()?)
    }

    fn ordered(&self) -> Result<OrderedSpace> {
        let x: OrderedSpace = parse(self.x_value()?, "ordered space")?;
        x.validate(&self.tol)?;
        Ok(x)
    }

    /// Tripotents in a file: a Tripotent object, or matrices of the first --space.
    fn tripotents_at(&self, path: &Path) -> Result<Vec<Tripotent>> {
        let v = read_json(path)?;
        if v.get("space").is_some() && v.get("u").is_some() {
            let z = Arc::new(space_from(v.clone())?);
            return Ok(vec![Tripotent::new(z, &matrix_from(v)?, &self.tol)?]);
        }
        let z = self.space()?;
        matrices_from(v)?
            .iter()
            .map(|m| Tripotent::new(z.clone(), m, &self.tol))
            .collect()
    }

    fn u(&self) -> Result<Tripotent> {
        let path = self.cli.u.first().ok_or_else(|| input("--u is required"))?;
        self.tripotents_at(path)?
            .into_iter()
            .next()
            .ok_or_else(|| input("--u holds no tripotent"))
    }

    fn v(&self) -> Result<Tripotent> {
        let path = self.cli.v.as_deref().ok_or_else(|| input("--v is required"))?;
        self.tripotents_at(path)?
            .into_iter()
            .next()
            .ok_or_else(|| input("--v holds no tripotent"))
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let tol = tolerance(cli)?;
    tol.validate(1)?;
    let cx = Ctx { cli, tol };
    let tol = &cx.tol;
    let out = match cli.command {
        Command::GenTro => {
            let z = match &cli.x {
                Some(_) => {
                    let gens = cx.xs()?;
                    let (p, q) = gens.first().ok_or_else(|| input("no generators"))?.shape();
                    TroSpace::generate(p, q, &gens, tol)?
                }
                None => (*random_instance(cli.dim_max, cli.seed)?.z).clone(),
            };
            Outcome::success(to_value(&z))
        }
        Command::Contains => {
            let z = cx.space()?;
            let x = cx.x()?;
            let verdict = z.contains(&x, tol)?;
            Outcome::verdict(verdict, json!({"distance": z.distance(&x)}))
        }
        Command::JAlg => Outcome::success(to_value(&cx.space()?.j_subalgebra(tol)?)),
        Command::ConeTest => {
            let z = cx.space()?;
            let x = cx.x()?;
            Outcome::verdict(z.natural_cone_membership(&x, tol)?, json!({}))
        }
        Command::Link => {
            let z = cx.space()?;
            let l = z.linking_algebra(tol);
            let mut doc = json!({
                "ambient_dim": l.ambient_dim(),
                "corner_dims": l.corners().iter().map(Subspace::dim).collect::<Vec<_>>(),
            });
            if cli.x.is_some() {
                let x = cx.x()?;
                x.ensure_shape(z.p(), z.q())?;
                let m = l.inject(&x);
                doc["theta"] = to_value(&l.theta(&m));
                doc["inject"] = to_value(&m);
            }
            Outcome::success(doc)
        }
        Command::Quotient => {
            let z = cx.space()?;
            let j = Subspace::span(z.p(), z.q(), &cx.xs()?, tol);
            let (quotient, map) = z.quotient_by_ideal(&j, tol)?;
            Outcome::success(json!({"quotient": to_value(&quotient), "map": to_value(&map)}))
        }
        Command::Sum => Outcome::success(to_value(&TroSpace::direct_sum(&cx.spaces()?, tol))),
        Command::Tripotent => {
            let z = cx.space()?;
            let m = match cli.u.first() {
                Some(p) => matrix_from(read_json(p)?)?,
                None => cx.x()?,
            };
            match Tripotent::new(z, &m, tol) {
                Ok(t) => Outcome::success(to_value(&t)),
                Err(e @ (Error::NotTripotent(_) | Error::NotInSpace { .. })) => {
                    Outcome::verdict(false, json!({"reason": e.to_string()}))
                }
                Err(e) => return Err(e),
            }
        }
        Command::Leq => {
            let check = tripotent::order_criteria(&cx.u()?, &cx.v()?, tol)?;
            let verdict = tripotent::leq(&cx.u()?, &cx.v()?, tol)?;
            Outcome::verdict(verdict, to_value(&check))
        }
        Command::Hat => {
            let u = cx.u()?;
            Outcome::success(json!({"hat": to_value(&u.hat()), "breve": to_value(&u.breve())}))
        }
        Command::Sup => match tripotent::sup(&cx.u()?, &cx.v()?, tol) {
            Ok(w) => Outcome::success(to_value(&w)),
            Err(Error::SupDoesNotExist) => Outcome::verdict(false, json!({})),
            Err(e) => return Err(e),
        },
        Command::SupExists => Outcome::verdict(tripotent::sup_exists(&cx.u()?, &cx.v()?, tol)?, json!({})),
        Command::Inf => Outcome::success(to_value(&tripotent::inf_commuting(&cx.u()?, &cx.v()?, tol)?)),
        Command::InfFamily => {
            let mut us = Vec::new();
            for p in &cli.u {
                us.extend(cx.tripotents_at(p)?);
            }
            let opts = InfFamilyOptions {
                seed: cli.seed,
                ..InfFamilyOptions::default()
            };
            Outcome::success(to_value(&tripotent::inf_family(&us, opts, tol)?))
        }
        Command::Amplify => {
            let n = cli.amplify.unwrap_or(2);
            if n == 0 {
                return Err(input("--amplify must be at least 1"));
            }
            Outcome::success(to_value(&tripotent::amplify(&cx.u()?, n, tol)?))
        }
        Command::Open => {
            let u = cx.u()?;
            let path = cli.space.last().ok_or_else(|| input("--space with the subTRO is required"))?;
            let sub = space_from(read_json(path)?)?;
            let check = tripotent::openness_criteria(&u, &sub, tol)?;
            let verdict = tripotent::is_open_relative(&u, &sub, tol)?;
            Outcome::verdict(verdict, to_value(&check))
        }
        Command::Maximal => Outcome::verdict(tripotent::is_maximal(&cx.u()?, tol), json!({})),
        Command::Peirce => {
            let u = cx.u()?;
            let relative = match cli.space.get(1) {
                Some(p) => Some(space_from(read_json(p)?)?),
                None => None,
            };
            let pa = PeirceAlgebra::build(&u, relative.as_ref(), tol)?;
            let axioms = pa.axiom_residuals();
            let mut doc = json!({
                "dim": pa.dim(),
                "unit": to_value(pa.unit().matrix()),
                "basis": to_value(&pa.space().basis()),
                "relative_dim": pa.relative().map(Subspace::dim),
                "axioms": to_value(&axioms),
            });
            let verdict = if cli.x.is_some() {
                let x = cx.x()?;
                let member = if relative.is_some() {
                    pa.relative_cone_membership(&x, tol)?
                } else {
                    pa.cone_membership(&x, tol)?
                };
                doc["cone_member"] = json!(member);
                member
            } else {
                axioms.max() <= 1e-8
            };
            Outcome::verdict(verdict, doc)
        }
        Command::Range => Outcome::success(to_value(&peirce::range_tripotent(&cx.space()?, &cx.x()?, tol)?)),
        Command::Limit => Outcome::success(to_value(&peirce::limit_tripotent(&cx.space()?, &cx.x()?, tol)?)),
        Command::Spectral => {
            let (lo, hi) = match (cli.lo, cli.hi) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => return Err(input("spectral needs --lo and --hi")),
            };
            Outcome::success(to_value(&peirce::spectral_tripotent(&cx.space()?, &cx.x()?, lo, hi, tol)?))
        }
        Command::Support => {
            let z = cx.space()?;
            let j = Subspace::span(z.p(), z.q(), &cx.xs()?, tol);
            Outcome::success(to_value(&peirce::support_tripotent(&z, &j, cli.seed, tol)?))
        }
        Command::HatElem => Outcome::success(to_value(&peirce::hat_element(&cx.space()?, &cx.x()?, tol)?)),
        Command::BlockBounds => {
            let opts = InfFamilyOptions {
                seed: cli.seed,
                ..InfFamilyOptions::default()
            };
            let n = cli.amplify.unwrap_or(2).max(1);
            Outcome::report(&peirce::block_bounds_check(&cx.space()?, &cx.x()?, n, opts, tol)?)
        }
        Command::Annihilator => {
            let z = cx.space()?;
            let s = conelab::annihilator(&z, &cx.xs()?, tol)?;
            Outcome::success(json!({"dim": s.dim(), "basis": to_value(&s.basis())}))
        }
        Command::CentralMax => Outcome::verdict(conelab::central_sa_maximal(&cx.u()?, tol)?, json!({})),
        Command::Probe => Outcome::report(&conelab::orderable_probe(&cx.u()?, tol)?),
        Command::BoundaryCone => {
            let bc = conelab::boundary_cone(&cx.ordered()?, tol)?;
            Outcome {
                ok: bc.report.verdict == Some(true),
                doc: json!({"w": to_value(&*bc.w), "u": to_value(&bc.u), "report": to_value(&bc.report)}),
            }
        }
        Command::BkCheck => Outcome::report(&conelab::bk_check(&cx.ordered()?, tol)?),
        Command::Completeness => {
            let opts = CompletenessOptions {
                seed: cli.seed,
                max_level: cli.amplify.unwrap_or(2),
                ..CompletenessOptions::default()
            };
            Outcome::report(&conelab::completeness_check(&cx.ordered()?, opts, tol)?)
        }
        Command::DecomposeProj => {
            let (u, q) = conelab::restricted_linking_decompose(&cx.space()?, &cx.x()?, tol)?;
            Outcome::success(json!({"u": to_value(&u), "q": to_value(&q)}))
        }
        Command::Verify => {
            let report = match &cli.fixture {
                Some(path) => {
                    let fixture: OrderFixture = parse(read_json(path)?, "fixture")?;
                    suite::verify_fixture(&fixture, tol)
                }
                None => {
                    let config = SuiteConfig {
                        suite: cli.suite.clone(),
                        trials: cli.trials,
                        dim_max: cli.dim_max,
                        seed: cli.seed,
                        tol: *tol,
                    };
                    suite::verify(&config)?
                }
            };
            Outcome {
                ok: report.ok(),
                doc: to_value(&report),
            }
        }
    };
    Ok(out)
}
