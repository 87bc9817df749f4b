//! `graphdsl`: compile, run, check and analyze DSL programs, and generate
//! synthetic graphs.

mod diag;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args as ClapArgs, Parser, Subcommand, ValueEnum};
use graphdsl::codegen::{generate, BackendKind, CodegenConfig};
use graphdsl::corpus::list_corpus;
use graphdsl::csr::{rmat_edges, uniform_random_edges, CsrGraph, RmatParams};
use graphdsl::frontend::parse_source;
use graphdsl::interpreter::{parse_args, run, RunConfig};
use graphdsl::semantic::{analyze, report, type_check, type_check_function, AnnotatedProgram};

use diag::{Diag, Reporter};

#[derive(Parser)]
#[command(name = "graphdsl", version, about = "Graph DSL compiler and reference interpreter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate backend source for a program.
    Compile(CompileOpts),
    /// Interpret a program on a graph and print its outputs.
    Run(RunOpts),
    /// Interpret a corpus program and compare it with its oracle.
    Check(RunOpts),
    /// Print the transfer, reduction and fixed-point analyses.
    Analyze(ProgramOpts),
    /// Write a synthetic edge list.
    GenGraph(GenOpts),
}

#[derive(ClapArgs)]
struct ProgramOpts {
    /// DSL source file.
    program: PathBuf,
    /// Entry function (defaults to the first one).
    #[arg(long)]
    function: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Cuda,
    Openacc,
    Sycl,
    Opencl,
    All,
}

#[derive(ClapArgs)]
struct CompileOpts {
    #[command(flatten)]
    program: ProgramOpts,
    #[arg(long, value_enum, default_value = "all")]
    backend: BackendArg,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write `<name>.analysis.txt`.
    #[arg(long)]
    emit_analysis: bool,
    /// Threads per block (CUDA) or global size (SYCL, OpenCL).
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u32).range(1..))]
    num_threads: u32,
    #[arg(long, default_value = "gpu_")]
    device_prefix: String,
    /// Emulate float atomics with compare-exchange loops.
    #[arg(long)]
    float_atomics_emulation: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Seq,
    Par,
}

#[derive(ClapArgs)]
struct RunOpts {
    #[command(flatten)]
    program: ProgramOpts,
    /// Edge list: one `u v [w]` per line.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    directed: bool,
    /// Parameter binding `name=value`; node sets take `0,3,5` or `all`.
    #[arg(long = "arg", value_name = "NAME=VALUE", value_parser = parse_binding)]
    args: Vec<(String, String)>,
    #[arg(long, value_enum, default_value = "seq")]
    mode: ModeArg,
    /// Worker threads in parallel mode.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
    /// fixedPoint iteration limit.
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Uniform,
    Rmat,
}

#[derive(ClapArgs)]
struct GenOpts {
    #[arg(long, value_enum, default_value = "rmat")]
    kind: GraphKind,
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    edges: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value_t = 0.57)]
    a: f64,
    #[arg(long, default_value_t = 0.19)]
    b: f64,
    #[arg(long, default_value_t = 0.19)]
    c: f64,
    #[arg(long, default_value_t = 0.05)]
    d: f64,
    /// Attach uniform random weights in [1, MAX].
    #[arg(long, value_name = "MAX")]
    max_weight: Option<i32>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_binding(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.to_string())),
        _ => Err(format!("expected NAME=VALUE, found `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut r = Reporter::from_env();
    let result = match cli.command {
        Command::Compile(o) => compile(&o, &mut r),
        Command::Run(o) => run_cmd(&o, &mut r),
        Command::Check(o) => check(&o, &mut r),
        Command::Analyze(o) => analyze_cmd(&o, &mut r),
        Command::GenGraph(o) => gen_graph(&o, &mut r),
    };
    match result {
        Ok(code) => code,
        Err(d) => {
            r.emit(&d);
            d.exit_code()
        }
    }
}

type Outcome = Result<ExitCode, Diag>;

struct Loaded {
    path: String,
    source: String,
    program: AnnotatedProgram,
}

fn load_program(o: &ProgramOpts, r: &mut Reporter) -> Result<Loaded, Diag> {
    let path = o.program.display().to_string();
    let source = fs::read_to_string(&o.program).map_err(|e| Diag::io(&path, e))?;
    let ast = parse_source(&source).map_err(|e| Diag::at(&path, &source, e.span(), e.to_string()))?;
    let checked = match &o.function {
        Some(name) => type_check_function(&ast, name),
        None => type_check(&ast),
    };
    let program = checked.map_err(|e| Diag::at(&path, &source, e.span, e.message))?;
    for w in program.warnings() {
        r.emit(&Diag::warning(&path, &source, w.span, &w.message));
    }
    Ok(Loaded { path, source, program })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "program".into())
}

fn compile(o: &CompileOpts, r: &mut Reporter) -> Outcome {
    let l = load_program(&o.program, r)?;
    let analyses = analyze(&l.program);
    let name = stem(&o.program.program);
    let cfg = CodegenConfig {
        num_threads: o.num_threads as usize,
        device_var_prefix: o.device_prefix.clone(),
        float_atomics_emulation: o.float_atomics_emulation,
        program_name: Some(name.clone()),
        ..CodegenConfig::default()
    };
    let backends: Vec<BackendKind> = match o.backend {
        BackendArg::Cuda => vec![BackendKind::Cuda],
        BackendArg::Openacc => vec![BackendKind::OpenAcc],
        BackendArg::Sycl => vec![BackendKind::Sycl],
        BackendArg::Opencl => vec![BackendKind::OpenCl],
        BackendArg::All => BackendKind::ALL.to_vec(),
    };
    let mut units = Vec::new();
    for b in backends {
        let unit = generate(&l.program, &analyses, b, &cfg).map_err(|e| match e.span() {
            Some(span) => Diag::at(&l.path, &l.source, span, e.to_string()),
            None => Diag::error(&l.path, e.to_string()),
        })?;
        units.push(unit);
    }
    let out = o.out.display().to_string();
    fs::create_dir_all(&o.out).map_err(|e| Diag::io(&out, e))?;
    let write = |file: &str, text: &str| {
        let p = o.out.join(file);
        fs::write(&p, text).map_err(|e| Diag::io(&p.display().to_string(), e))?;
        println!("{}", p.display());
        Ok::<_, Diag>(())
    };
    for u in &units {
        for (file, text) in &u.files {
            write(file, text)?;
        }
    }
    if o.emit_analysis {
        write(&format!("{name}.analysis.txt"), &report::render(&l.program, &analyses))?;
    }
    Ok(ExitCode::SUCCESS)
}

struct Prepared {
    loaded: Loaded,
    graph: CsrGraph,
    args: graphdsl::interpreter::Args,
    config: RunConfig,
}

fn prepare(o: &RunOpts, r: &mut Reporter) -> Result<Prepared, Diag> {
    let loaded = load_program(&o.program, r)?;
    let gpath = o.graph.display().to_string();
    let graph = CsrGraph::load_edge_list(&o.graph, o.directed, None).map_err(|e| Diag::graph(&gpath, e))?;
    // Corpus programs fall back to their documented defaults.
    let mut pairs: Vec<(String, String)> = list_corpus()
        .into_iter()
        .find(|e| e.function == loaded.program.name)
        .map(|e| e.default_args())
        .unwrap_or_default();
    for (k, v) in &o.args {
        pairs.retain(|(n, _)| n != k);
        pairs.push((k.clone(), v.clone()));
    }
    let args =
        parse_args(&loaded.program, &pairs, graph.num_nodes()).map_err(|e| Diag::error(&loaded.path, e.to_string()))?;
    let mut config = match o.mode {
        ModeArg::Seq => RunConfig::default(),
        ModeArg::Par => RunConfig::parallel(o.threads as usize),
    };
    config.fixpoint_cap = o.max_iterations;
    Ok(Prepared {
        loaded,
        graph,
        args,
        config,
    })
}

fn runtime_diag(l: &Loaded, e: graphdsl::interpreter::RuntimeError) -> Diag {
    match e.span() {
        Some(span) => Diag::at(&l.path, &l.source, span, e.to_string()),
        None => Diag::error(&l.path, e.to_string()),
    }
}

fn run_cmd(o: &RunOpts, r: &mut Reporter) -> Outcome {
    let p = prepare(o, r)?;
    let store = run(&p.loaded.program, &p.graph, &p.args, &p.config).map_err(|e| runtime_diag(&p.loaded, e))?;
    print!("{}", store.render());
    Ok(ExitCode::SUCCESS)
}

fn check(o: &RunOpts, r: &mut Reporter) -> Outcome {
    let p = prepare(o, r)?;
    let l = &p.loaded;
    let entry = list_corpus()
        .into_iter()
        .find(|e| e.function == l.program.name)
        .ok_or_else(|| Diag::error(&l.path, format!("no oracle for function `{}`", l.program.name)))?;
    let store = run(&l.program, &p.graph, &p.args, &p.config).map_err(|e| runtime_diag(l, e))?;
    let oracle = entry
        .oracle_for(&p.graph, &p.args)
        .map_err(|e| Diag::error(&l.path, e.to_string()))?;
    let cmp = entry
        .compare(&store, &oracle)
        .map_err(|e| Diag::error(&l.path, e.to_string()))?;
    println!("{} {} = oracle {}", entry.output, cmp.interpreter, cmp.oracle);
    println!(
        "max abs error {:e}, max rel error {:e}",
        cmp.max_abs_error, cmp.max_rel_error
    );
    if cmp.pass {
        println!("ok ({:?})", entry.tolerance);
        Ok(ExitCode::SUCCESS)
    } else {
        Err(Diag::error(
            &l.path,
            format!("result differs from the oracle beyond {:?}", entry.tolerance),
        ))
    }
}

fn analyze_cmd(o: &ProgramOpts, r: &mut Reporter) -> Outcome {
    let l = load_program(o, r)?;
    print!("{}", report::render(&l.program, &analyze(&l.program)));
    Ok(ExitCode::SUCCESS)
}

fn gen_graph(o: &GenOpts, _r: &mut Reporter) -> Outcome {
    if o.nodes == 0 {
        return Err(Diag::usage("--nodes must be positive"));
    }
    let params = RmatParams {
        a: o.a,
        b: o.b,
        c: o.c,
        d: o.d,
    };
    let probs = [o.a, o.b, o.c, o.d];
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || ((probs.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
        return Err(Diag::usage("RMAT parameters must lie in [0, 1] and sum to 1"));
    }
    let edges = match o.kind {
        GraphKind::Uniform => uniform_random_edges(o.nodes, o.edges, o.directed, o.seed),
        GraphKind::Rmat => rmat_edges(o.nodes, o.edges, params, o.directed, o.seed),
    };
    let mut g = CsrGraph::build_from_edges(o.nodes, &edges, o.directed).map_err(|e| Diag::graph("gen-graph", e))?;
    if let Some(max) = o.max_weight {
        if max < 1 {
            return Err(Diag::usage("--max-weight must be at least 1"));
        }
        g = g.assign_random_weights(1, max, o.seed);
    }
    let text = format!("# nodes {} arcs {}\n{}", g.num_nodes(), g.num_edges(), g.to_edge_list());
    match &o.out {
        Some(p) => fs::write(p, text).map_err(|e| Diag::io(&p.display().to_string(), e))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
