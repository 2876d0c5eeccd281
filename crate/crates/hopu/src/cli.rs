//! Batch and interactive drivers over the engine.
//!
//! Exit codes: 0 when every batch query produced at least one answer,
//! 1 when some query produced none, 2 on load, parse or type errors.

use std::io::{BufRead, Write};
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::engine::{Config, Engine, SolveLimits, Trace};
use crate::pretty::Printer;
use crate::typecheck::TypeOpt;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OptLevel {
    None,
    Skeleton,
    Full,
}

impl From<OptLevel> for TypeOpt {
    fn from(o: OptLevel) -> TypeOpt {
        match o {
            OptLevel::None => TypeOpt::None,
            OptLevel::Skeleton => TypeOpt::Skeleton,
            OptLevel::Full => TypeOpt::Full,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "hopu",
    about = "A lambda-Prolog engine organized around higher-order pattern unification",
    disable_help_flag = false
)]
pub struct Args {
    /// Program files, loaded in order.
    pub files: Vec<String>,
    /// Batch query (repeatable); without any, an interactive session starts.
    #[arg(short = 'q', long = "query")]
    pub query: Vec<String>,
    /// Maximum number of answers reported per query.
    #[arg(long = "answers", default_value_t = 10)]
    pub answers: usize,
    /// Runtime type processing level.
    #[arg(long = "type-opt", value_enum, default_value = "full")]
    pub type_opt: OptLevel,
    /// Trace area: unify, normalize or clauses (repeatable).
    #[arg(long = "trace")]
    pub trace: Vec<String>,
    /// Run a named micro-benchmark: naive-rev, linear-rev or copy-depth4.
    #[arg(long = "bench")]
    pub bench: Option<String>,
}

pub fn main(argv: Vec<String>) -> i32 {
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            // clap renders --help/--version through the same path
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    run(args)
}

pub fn run(args: Args) -> i32 {
    let mut trace = Trace::default();
    for t in &args.trace {
        match t.as_str() {
            "unify" => trace.unify = true,
            "normalize" => trace.normalize = true,
            "clauses" => trace.clauses = true,
            other => {
                eprintln!(
                    "unknown trace area '{}': use unify, normalize or clauses",
                    other
                );
                return 2;
            }
        }
    }
    let config = Config {
        type_opt: args.type_opt.into(),
        limits: SolveLimits {
            max_answers: args.answers,
            max_steps: u64::MAX,
        },
        trace,
    };

    if let Some(bench) = &args.bench {
        return run_bench(bench);
    }

    let mut sources = Vec::new();
    for f in &args.files {
        match std::fs::read_to_string(f) {
            Ok(s) => sources.push(s),
            Err(e) => {
                eprintln!("cannot read '{}': {}", f, e);
                return 2;
            }
        }
    }
    let mut engine = match Engine::load(&sources.join("\n"), config) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("{}", e);
            return 2;
        }
    };

    if args.query.is_empty() {
        return repl(&mut engine, sources, config);
    }

    let mut all_succeeded = true;
    for q in &args.query {
        match batch_query(&mut engine, q) {
            Ok(n) => {
                if n == 0 {
                    all_succeeded = false;
                }
            }
            Err(e) => {
                eprintln!("{}", e);
                return 2;
            }
        }
    }
    if all_succeeded {
        0
    } else {
        1
    }
}

/// Runs one batch query, printing every answer (up to the configured
/// limit) and a closing marker. Returns the number of answers.
fn batch_query(engine: &mut Engine, q: &str) -> Result<usize, crate::engine::LoadError> {
    let max = engine.config.limits.max_answers;
    let mut solver = engine.solver(q)?;
    let mut shown = 0usize;
    let mut lines = Vec::new();
    let mut exhausted = false;
    while shown < max {
        match solver.next_answer() {
            None => {
                exhausted = true;
                break;
            }
            Some(ans) => {
                shown += 1;
                lines.push(render_answer(&ans, solver.engine(), true));
            }
        }
    }
    drop(solver);
    for l in lines {
        println!("{}", l);
    }
    if exhausted {
        if shown == 0 {
            println!("no");
        } else {
            println!("no more answers");
        }
    }
    Ok(shown)
}

fn render_answer(ans: &crate::engine::Answer, engine: &Engine, with_period: bool) -> String {
    let mut p = Printer::new(&engine.st, &engine.program.sig.tycons);
    let mut lines = p.answer(ans);
    if with_period {
        lines[0].push('.');
    }
    lines.join("\n")
}

/// The interactive loop: reads period-terminated queries and commands
/// from standard input; after an answer, a line starting with `;`
/// requests the next one.
pub fn repl(engine: &mut Engine, mut sources: Vec<String>, mut config: Config) -> i32 {
    let stdin = std::io::stdin();
    let mut input = stdin.lock().lines();
    let mut current = String::new();
    loop {
        if current.is_empty() {
            print!("?- ");
        }
        let _ = std::io::stdout().flush();
        let line = match input.next() {
            Some(Ok(l)) => l,
            _ => return 0, // end of input
        };
        current.push_str(&line);
        let trimmed = current.trim().to_string();
        if !trimmed.ends_with('.') {
            current.push(' ');
            continue;
        }
        current.clear();

        if let Some(rest) = trimmed.strip_prefix('#') {
            let cmd = rest.trim_end_matches('.').trim();
            if cmd == "quit" {
                return 0;
            } else if let Some(file) = cmd.strip_prefix("load ") {
                let file = file.trim().trim_matches('"');
                match std::fs::read_to_string(file) {
                    Ok(s) => {
                        sources.push(s);
                        match Engine::load(&sources.join("\n"), config) {
                            Ok(e) => *engine = e,
                            Err(e) => {
                                eprintln!("{}", e);
                                sources.pop();
                            }
                        }
                    }
                    Err(e) => eprintln!("cannot read '{}': {}", file, e),
                }
            } else if let Some(level) = cmd.strip_prefix("typeopt ") {
                let opt = match level.trim() {
                    "none" => Some(TypeOpt::None),
                    "skeleton" => Some(TypeOpt::Skeleton),
                    "full" => Some(TypeOpt::Full),
                    other => {
                        eprintln!("unknown type-opt level '{}'", other);
                        None
                    }
                };
                if let Some(opt) = opt {
                    config.type_opt = opt;
                    match Engine::load(&sources.join("\n"), config) {
                        Ok(e) => *engine = e,
                        Err(e) => eprintln!("{}", e),
                    }
                }
            } else {
                eprintln!("unknown command '#{}'", cmd);
            }
            continue;
        }

        // a query
        let mut solver = match engine.solver(&trimmed) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("{}", e);
                continue;
            }
        };
        let mut shown = 0usize;
        loop {
            match solver.next_answer() {
                None => {
                    if shown == 0 {
                        println!("no");
                    } else {
                        println!("no more answers");
                    }
                    break;
                }
                Some(ans) => {
                    shown += 1;
                    let text = render_answer(&ans, solver.engine(), false);
                    println!("{}", text);
                    let _ = std::io::stdout().flush();
                    match input.next() {
                        Some(Ok(l)) if l.trim_start().starts_with(';') => continue,
                        Some(Ok(_)) => {
                            println!("yes");
                            break;
                        }
                        _ => return 0,
                    }
                }
            }
        }
    }
}

/// Desk-scale smoke benchmarks; wall time only.
fn run_bench(name: &str) -> i32 {
    let config = Config::default();
    match name {
        "naive-rev" => {
            let text = include_str!("../corpus/rev.lp");
            let mut engine = Engine::load(text, config).expect("benchmark program loads");
            let list = mk_list(10);
            let q = format!("rev {} R.", list);
            let start = Instant::now();
            for _ in 0..30_000 {
                let out = engine.solve(&q).expect("benchmark query runs");
                assert_eq!(out.answers.len(), 1);
            }
            let dt = start.elapsed();
            println!(
                "naive-rev: 30000 reversals of a 10-element list in {:.3}s",
                dt.as_secs_f64()
            );
            0
        }
        "linear-rev" => {
            let text = include_str!("../corpus/rev.lp");
            let mut engine = Engine::load(text, config).expect("benchmark program loads");
            let list = mk_list(10);
            let q = format!("linrev {} R.", list);
            let start = Instant::now();
            for _ in 0..100_000 {
                let out = engine.solve(&q).expect("benchmark query runs");
                assert_eq!(out.answers.len(), 1);
            }
            let dt = start.elapsed();
            println!(
                "linear-rev: 100000 reversals of a 10-element list in {:.3}s",
                dt.as_secs_f64()
            );
            0
        }
        "copy-depth4" => {
            let text = include_str!("../corpus/copy.lp");
            let mut engine = Engine::load(text, config).expect("benchmark program loads");
            let mut t = "a".to_string();
            for _ in 0..4 {
                t = format!("(app {} {})", t, t);
            }
            let q = format!("copy {} R.", t);
            let start = Instant::now();
            for _ in 0..100_000 {
                let out = engine.solve(&q).expect("benchmark query runs");
                assert_eq!(out.answers.len(), 1);
            }
            let dt = start.elapsed();
            println!("copy-depth4: 100000 copies in {:.3}s", dt.as_secs_f64());
            0
        }
        other => {
            eprintln!(
                "unknown benchmark '{}': use naive-rev, linear-rev or copy-depth4",
                other
            );
            2
        }
    }
}

fn mk_list(n: usize) -> String {
    let mut s = "mnil".to_string();
    for i in 0..n {
        let e = if i % 2 == 0 { "e1" } else { "e2" };
        s = format!("(mcons {} {})", e, s);
    }
    s
}
