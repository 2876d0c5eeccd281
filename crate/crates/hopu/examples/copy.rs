//! Loading a program and running queries: the `copy` predicate walks
//! object-level lambda terms encoded with higher-order abstract syntax,
//! recursing under binders with scoped constants and scoped clauses.
//!
//!     cargo run -p hopu --example copy

use hopu::engine::{Config, Engine};
use hopu::pretty::Printer;

fn main() {
    let program = include_str!("../corpus/copy.lp");
    let mut engine = Engine::load(program, Config::default()).unwrap();

    for query in [
        "copy a R.",
        "copy (app a a) R.",
        "copy (abs (x\\ app x x)) R.",
        "copy (abs (x\\ abs (y\\ app x (app y a)))) R.",
    ] {
        let out = engine.solve(query).unwrap();
        println!("?- {}", query);
        let mut printer = Printer::new(&engine.st, &engine.program.sig.tycons);
        for answer in &out.answers {
            for line in printer.answer(answer) {
                println!("   {}", line);
            }
        }
        println!();
    }
}
