//! Enumerating multiple answers: the prenex-normal-form program finds
//! every way of raising quantifiers over the connectives, in clause
//! order, by backtracking.
//!
//!     cargo run -p hopu --example prenex

use hopu::engine::{Config, Engine};
use hopu::pretty::Printer;

fn main() {
    let program = include_str!("../corpus/prenex.lp");
    let mut engine = Engine::load(program, Config::default()).unwrap();

    let query = "prenex (and (all x\\ (adj x x)) (all z\\ (all y\\ (adj z y)))) Pnf.";
    println!("?- {}", query);
    let mut solver = engine.solver(query).unwrap();
    let mut n = 0;
    while let Some(answer) = solver.next_answer() {
        n += 1;
        let mut printer = Printer::new(&solver.engine().st, &solver.engine().program.sig.tycons);
        for line in printer.answer(&answer) {
            println!("  answer {}: {}", n, line);
        }
    }
    println!("{} prenex forms.", n);
}
