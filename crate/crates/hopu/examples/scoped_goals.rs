//! Generic and augment goals: universal goals introduce constants at a
//! deeper universe, implications extend the program for exactly the
//! subgoal's extent, and unification enforces the quantifier ordering.
//!
//!     cargo run -p hopu --example scoped_goals

use hopu::engine::{Config, Engine};

fn main() {
    let program = "kind i type.\ntype p i -> i -> o.\ntype q i -> o.\np X X.\n";
    let mut engine = Engine::load(program, Config::default()).unwrap();

    // forall z, exists y: solvable by picking y := z
    let ok = engine.solve("Pi z\\ (Sigma y\\ (p y z)).").unwrap();
    println!("Pi z (Sigma y (p y z))  ->  {} answer(s)", ok.answers.len());

    // exists y, forall z: the single clause would need y := z, which the
    // universe discipline rejects
    let no = engine.solve("Sigma y\\ (Pi z\\ (p y z)).").unwrap();
    println!("Sigma y (Pi z (p y z))  ->  {} answer(s)", no.answers.len());

    // an augment goal's clause is visible only inside its extent
    let inside = engine.solve("Pi c\\ (q c => q c).").unwrap();
    println!(
        "Pi c (q c => q c)       ->  {} answer(s)",
        inside.answers.len()
    );
    let outside = engine.solve("Pi c\\ ((q c => true), q c).").unwrap();
    println!(
        "Pi c ((q c => true), q c) -> {} answer(s)",
        outside.answers.len()
    );
}
