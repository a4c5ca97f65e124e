//! Command-line interface.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use crate::divergence::{ab_divergence, divergence_grid, ABParams, DivergenceRequest, NamedDivergence, Scope};
use crate::error::Error;
use crate::graph::ChordalGraph;
use crate::io;
use crate::model::{chow_liu_structure, fit_parameters, DecomposableModel, SampleDataset, VariableTable};
use crate::oracle;
use crate::VarId;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotChordal
        | Error::InvalidModel(_)
        | Error::CardinalityMismatch { .. }
        | Error::ScopeNotCovered(_)
        | Error::InvalidRequest(_) => 2,
        Error::InvalidData(_) | Error::EmptyDataset => 3,
        Error::NonPositive { .. } | Error::UndefinedQuotient { .. } => 4,
        Error::NonFinite { .. } => 5,
        Error::DomainTooLarge { .. } => 6,
        Error::Io(_) | Error::Internal(_) => 1,
    }
}

#[derive(Parser, Debug)]
#[command(name = "divkit", version, about = "Exact alpha-beta divergences between decomposable models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a decomposable model to sample data.
    Fit(FitArgs),
    /// Divergence between two model files.
    Divergence(DivergenceArgs),
    /// Marginal divergence for every variable tuple of one order.
    Grid(GridArgs),
    /// Fit ideal and observed models and write marginal grids plus a summary.
    Report(ReportArgs),
    /// Brute-force reference value over the explicit joint tables.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Learner {
    ChowLiu,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Kl,
    ReverseKl,
    Hellinger,
    ItakuraSaito,
    LogL2,
}

impl From<Preset> for NamedDivergence {
    fn from(p: Preset) -> Self {
        match p {
            Preset::Kl => NamedDivergence::Kl,
            Preset::ReverseKl => NamedDivergence::ReverseKl,
            Preset::Hellinger => NamedDivergence::Hellinger,
            Preset::ItakuraSaito => NamedDivergence::ItakuraSaito,
            Preset::LogL2 => NamedDivergence::LogL2,
        }
    }
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct StructureSource {
    /// Structure file (JSON) with the graph to fit.
    #[arg(long)]
    pub structure: Option<PathBuf>,
    /// Learn the structure from the data.
    #[arg(long, value_enum)]
    pub learn: Option<Learner>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub source: StructureSource,
    /// Sample CSV with a header row of variable names.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub pseudocount: f64,
    /// Where to write the fitted model.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long, allow_hyphen_values = true, requires = "beta", conflicts_with = "preset")]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "alpha")]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Args, Debug, Clone)]
pub struct ScopeArgs {
    /// Compare marginals on these variables (names or ids).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["target", "given"])]
    pub marginal: Option<Vec<String>>,
    /// Compare conditionals of these variables...
    #[arg(long, value_delimiter = ',')]
    pub target: Option<Vec<String>>,
    /// ...given these (may be omitted for an empty conditioning set).
    #[arg(long, value_delimiter = ',', requires = "target")]
    pub given: Option<Vec<String>>,
}

#[derive(Args, Debug)]
pub struct DivergenceArgs {
    #[arg(long)]
    pub p: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub scope: ScopeArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Include wall time in the diagnostics.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[arg(long)]
    pub p: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, value_enum, default_value = "hellinger")]
    pub preset: Preset,
    /// File listing one tuple per line (names or ids separated by ',' or ';').
    #[arg(long)]
    pub tuples: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads (0 = all cores); DIVKIT_THREADS takes precedence.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub ideal_data: PathBuf,
    #[arg(long)]
    pub observed_data: PathBuf,
    #[command(flatten)]
    pub source: StructureSource,
    /// Learn one structure per data file instead of one on both combined.
    #[arg(long, conflicts_with = "shared_structure")]
    pub separate_structures: bool,
    /// Learn one structure on both files combined (the default).
    #[arg(long)]
    pub shared_structure: bool,
    #[arg(long, default_value_t = 1.0)]
    pub pseudocount: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub orders: Vec<usize>,
    #[arg(long, value_enum, default_value = "hellinger")]
    pub preset: Preset,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub p: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub scope: ScopeArgs,
    /// Largest joint table the oracle may build.
    #[arg(long, default_value_t = 4096.0)]
    pub max_cells: f64,
}

/// Parses `args` (including the program name) and runs the command,
/// writing any stdout payload to `out`. Returns the exit status.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> crate::Result<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(a, out),
        Command::Divergence(a) => cmd_divergence(a, out),
        Command::Grid(a) => cmd_grid(a, out),
        Command::Report(a) => cmd_report(a),
        Command::Oracle(a) => cmd_oracle(a, out),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> crate::Result<()> {
    match path {
        Some(p) => io::write_file(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(format!("cannot write output: {e}"))),
    }
}

/// Structure from a file, aligned with the data's columns by name when the
/// file names its variables.
fn load_structure(path: &Path, data_names: &[String]) -> crate::Result<(ChordalGraph, Vec<Option<usize>>)> {
    let s = io::read_structure(path)?;
    if s.names.len() != data_names.len() {
        return Err(Error::InvalidModel(format!(
            "structure has {} variables, data has {}",
            s.names.len(),
            data_names.len()
        )));
    }
    let mut map: Vec<VarId> = (0..data_names.len()).collect();
    if s.names.iter().all(|n| n.is_some()) {
        for (i, n) in s.names.iter().enumerate() {
            map[i] = data_names
                .iter()
                .position(|d| Some(d) == n.as_ref())
                .ok_or_else(|| Error::InvalidModel(format!("structure variable '{}' not in data", n.as_ref().unwrap())))?;
        }
    }
    let mut g = crate::graph::UndirectedGraph::with_vertices(0..data_names.len());
    for (u, v) in s.graph.edges() {
        g.add_edge(map[u], map[v]);
    }
    let mut cards = vec![None; data_names.len()];
    for (i, c) in s.cardinalities.iter().enumerate() {
        cards[map[i]] = *c;
    }
    Ok((ChordalGraph::from_graph(g)?, cards))
}

fn merge_cards(inferred: Vec<usize>, declared: &[Option<usize>]) -> crate::Result<Vec<usize>> {
    inferred
        .into_iter()
        .zip(declared)
        .enumerate()
        .map(|(v, (i, d))| match d {
            Some(c) if *c < i => Err(Error::InvalidData(format!(
                "variable {v} takes value {} but is declared with cardinality {c}",
                i - 1
            ))),
            Some(c) => Ok(*c),
            None => Ok(i),
        })
        .collect()
}

fn cmd_fit(a: FitArgs, out: &mut dyn Write) -> crate::Result<()> {
    let (names, rows) = io::read_samples_raw(&a.data)?;
    let inferred = io::infer_cardinalities(names.len(), &rows);
    let (structure, cards) = match (&a.source.structure, a.source.learn) {
        (Some(path), _) => {
            let (g, declared) = load_structure(path, &names)?;
            (Some(g), merge_cards(inferred, &declared)?)
        }
        _ => (None, inferred),
    };
    let data = io::dataset(&names, &cards, rows)?;
    let structure = match structure {
        Some(g) => g,
        None => chow_liu_structure(&data, a.pseudocount)?,
    };
    let model = fit_parameters(&structure, &data, a.pseudocount)?;
    io::write_model(&a.out, &model)?;
    let text = format!(
        "variables: {}\ncliques: {}\ntreewidth: {}\nlog_likelihood: {}\n",
        model.variables().len(),
        model.cliques().len(),
        model.treewidth(),
        io::number(model.log_likelihood(&data))
    );
    emit(out, None, &text)
}

fn resolve(vars: &VariableTable, tokens: &[String]) -> crate::Result<Vec<VarId>> {
    tokens
        .iter()
        .map(|t| {
            let t = t.trim();
            vars.id_of(t)
                .or_else(|| t.parse::<VarId>().ok().filter(|&v| v < vars.len()))
                .ok_or_else(|| Error::InvalidRequest(format!("unknown variable '{t}'")))
        })
        .collect()
}

fn params_of(a: &ParamArgs) -> crate::Result<(ABParams, Option<NamedDivergence>)> {
    match (a.preset, a.alpha, a.beta) {
        (Some(p), _, _) => {
            let n: NamedDivergence = p.into();
            Ok((n.params(), Some(n)))
        }
        (None, Some(al), Some(be)) => Ok((ABParams::new(al, be)?, None)),
        _ => Err(Error::InvalidRequest("give --alpha and --beta, or --preset".into())),
    }
}

fn scope_of(vars: &VariableTable, a: &ScopeArgs) -> crate::Result<Scope> {
    if let Some(m) = &a.marginal {
        return Ok(Scope::Marginal(resolve(vars, m)?));
    }
    if let Some(t) = &a.target {
        let given = match &a.given {
            Some(g) => resolve(vars, g)?,
            None => Vec::new(),
        };
        return Ok(Scope::Conditional {
            target: resolve(vars, t)?,
            given,
        });
    }
    Ok(Scope::Joint)
}

fn load_pair(p: &Path, q: &Path) -> crate::Result<(DecomposableModel, DecomposableModel)> {
    let (p, q) = (io::read_model(p)?, io::read_model(q)?);
    if p.variables().cardinalities() != q.variables().cardinalities() {
        return Err(Error::InvalidModel("the two models have different variable tables".into()));
    }
    Ok((p, q))
}

fn cmd_divergence(a: DivergenceArgs, out: &mut dyn Write) -> crate::Result<()> {
    let (p, q) = load_pair(&a.p, &a.q)?;
    let (params, preset) = params_of(&a.params)?;
    let scope = scope_of(p.variables(), &a.scope)?;
    let mut r = ab_divergence(&p, &q, &DivergenceRequest::new(params, scope))?;
    if let Some(n) = preset {
        r.value = n.finish(r.value);
    }
    info!("divergence {} in {:.1} ms", r.value, r.diagnostics.millis);
    let text = match a.format {
        Format::Json => io::result_to_json(p.variables(), &r, preset, a.timing),
        Format::Csv => io::result_to_csv(p.variables(), &r, preset),
    };
    emit(out, a.out.as_deref(), &text)
}

fn thread_count(flag: usize) -> usize {
    std::env::var("DIVKIT_THREADS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(flag)
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> crate::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(threads))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn read_tuples(path: &Path, vars: &VariableTable) -> crate::Result<Vec<Vec<VarId>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let toks: Vec<String> = l.split([',', ';']).map(str::to_string).collect();
            resolve(vars, &toks)
        })
        .collect()
}

fn cmd_grid(a: GridArgs, out: &mut dyn Write) -> crate::Result<()> {
    let (p, q) = load_pair(&a.p, &a.q)?;
    let filter = match &a.tuples {
        Some(path) => Some(read_tuples(path, p.variables())?),
        None => None,
    };
    let name: NamedDivergence = a.preset.into();
    let grid = with_threads(a.threads, || divergence_grid(&p, &q, a.order, name, filter.as_deref()))??;
    let text = match a.format {
        Format::Csv => io::grid_to_csv(p.variables(), &grid),
        Format::Json => io::grid_to_json(p.variables(), &grid),
    };
    emit(out, a.out.as_deref(), &text)
}

fn cmd_report(a: ReportArgs) -> crate::Result<()> {
    let (names, ideal_rows) = io::read_samples_raw(&a.ideal_data)?;
    let (obs_names, obs_rows) = io::read_samples_raw(&a.observed_data)?;
    if names != obs_names {
        return Err(Error::InvalidData("ideal and observed files have different columns".into()));
    }
    let inferred = io::infer_cardinalities(names.len(), ideal_rows.iter().chain(&obs_rows));
    let (given, cards) = match &a.source.structure {
        Some(path) => {
            let (g, declared) = load_structure(path, &names)?;
            (Some(g), merge_cards(inferred, &declared)?)
        }
        None => (None, inferred),
    };
    let (ideal_n, obs_n) = (ideal_rows.len(), obs_rows.len());
    let ideal = io::dataset(&names, &cards, ideal_rows)?;
    let observed = io::dataset(&names, &cards, obs_rows)?;
    let (gp, gq) = match given {
        Some(g) => (g.clone(), g),
        None if a.separate_structures => (
            chow_liu_structure(&ideal, a.pseudocount)?,
            chow_liu_structure(&observed, a.pseudocount)?,
        ),
        None => {
            let both: Vec<Vec<usize>> = ideal.rows().iter().chain(observed.rows()).cloned().collect();
            let all = SampleDataset::new(ideal.variables().clone(), both)?;
            let g = chow_liu_structure(&all, a.pseudocount)?;
            (g.clone(), g)
        }
    };
    let p = fit_parameters(&gp, &ideal, a.pseudocount)?;
    let q = fit_parameters(&gq, &observed, a.pseudocount)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::Io(format!("cannot create {}: {e}", a.out.display())))?;

    let name: NamedDivergence = a.preset.into();
    let vars = p.variables();
    let mut orders = a.orders.clone();
    orders.sort_unstable();
    orders.dedup();
    let mut summary = Vec::new();
    for &k in &orders {
        let grid = with_threads(a.threads, || divergence_grid(&p, &q, k, name, None))??;
        let file = format!("grid_order{k}.csv");
        io::write_file(&a.out.join(&file), &io::grid_to_csv(vars, &grid))?;
        let mut ranked = grid.clone();
        ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        let top: Vec<_> = ranked
            .iter()
            .take(10)
            .map(|(t, v)| json!({"tuple": t.iter().map(|&i| vars.name(i)).collect::<Vec<_>>(), "value": v}))
            .collect();
        let mean = grid.iter().map(|g| g.1).sum::<f64>() / grid.len().max(1) as f64;
        summary.push(json!({"order": k, "file": file, "tuples": grid.len(), "mean": mean, "top": top}));
        info!("order {k}: {} tuples", grid.len());
    }
    let mut by_model = BTreeMap::new();
    by_model.insert("ideal", json!({"rows": ideal_n, "treewidth": p.treewidth(), "edges": p.graph().graph().edge_count()}));
    by_model.insert("observed", json!({"rows": obs_n, "treewidth": q.treewidth(), "edges": q.graph().graph().edge_count()}));
    let doc = json!({
        "preset": name.name(),
        "pseudocount": a.pseudocount,
        "models": by_model,
        "orders": summary,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serialises");
    text.push('\n');
    io::write_file(&a.out.join("summary.json"), &text)?;
    io::write_model(&a.out.join("ideal_model.json"), &p)?;
    io::write_model(&a.out.join("observed_model.json"), &q)
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> crate::Result<()> {
    let (p, q) = load_pair(&a.p, &a.q)?;
    let (params, preset) = params_of(&a.params)?;
    let scope = scope_of(p.variables(), &a.scope)?;
    let jp = oracle::joint_table_limited(&p, a.max_cells)?;
    let jq = oracle::joint_table_limited(&q, a.max_cells)?;
    let mut v = oracle::oracle_divergence(&jp, &jq, &DivergenceRequest::new(params, scope))?;
    if let Some(n) = preset {
        v = n.finish(v);
    }
    emit(out, None, &format!("{v:.11e}\n"))
}
