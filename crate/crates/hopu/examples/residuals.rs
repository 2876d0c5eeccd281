//! Answers qualified by residual constraints: a query that escapes the
//! pattern fragment is not enumerated Huet-style; the offending
//! disagreement pair is carried to the end and reported with the
//! answer.
//!
//!     cargo run -p hopu --example residuals

use hopu::engine::{Config, Engine};
use hopu::pretty::Printer;

fn main() {
    let program = include_str!("../corpus/mapfun.lp");
    let mut engine = Engine::load(program, Config::default()).unwrap();

    let query = "mapfun (a::nil) F ((g a)::nil).";
    println!("?- {}", query);
    let out = engine.solve(query).unwrap();
    let mut printer = Printer::new(&engine.st, &engine.program.sig.tycons);
    for answer in &out.answers {
        for line in printer.answer(answer) {
            println!("   {}", line);
        }
    }
    println!();
    println!("F stays unbound; the pair <F a, g a> survives as a constraint.");
    println!("Any instantiation of F that solves it is acceptable, but the");
    println!("engine does not enumerate the candidates.");
}
