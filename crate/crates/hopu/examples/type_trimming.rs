//! Static type-footprint reduction: skeleton splitting drops the
//! annotations determined by a constant's target type, and the
//! neededness fixpoint removes predicate annotations that cannot
//! influence any computation.
//!
//!     cargo run -p hopu --example type_trimming

use hopu::engine::{Config, Engine};
use hopu::typecheck::TypeOpt;

fn main() {
    let program = "\
        type append list A -> list A -> list A -> o.\n\
        append nil L L.\n\
        append (X :: L1) L2 (X :: L3) :- append L1 L2 L3.\n\
        \n\
        type print A -> o.\n\
        type write_int int -> o.\n\
        type write_string string -> o.\n\
        write_int X.\n\
        write_string X.\n\
        print N :- write_int N.\n\
        print S :- write_string S.\n\
        \n\
        type printlist (list A) -> o.\n\
        printlist nil.\n\
        printlist (X :: L) :- print X, printlist L.\n";

    let engine = Engine::load(program, Config::default()).unwrap();
    for name in ["append", "print", "printlist"] {
        let idx = engine.program.sig.lookup(name).unwrap();
        let decl = engine.program.sig.decl(idx);
        let mask = &engine.program.needed[&idx];
        println!(
            "{:10} skeleton variables: {}, needed mask: {:?}, runtime annotations at heads: {}",
            name,
            decl.skel_vars.len(),
            mask,
            decl.pred_ann_len
        );
    }
    println!();
    println!("append's annotation is provably inert and is elided at the");
    println!("full optimization level; print dispatches on its argument");
    println!("type, so its annotation (and printlist's, through the body");
    println!("call) must stay.");

    // identical answers at every level
    for opt in [TypeOpt::None, TypeOpt::Skeleton, TypeOpt::Full] {
        let mut config = Config::default();
        config.type_opt = opt;
        let mut e = Engine::load(program, config).unwrap();
        let out = e.solve("append (1::nil) (2::nil) L.").unwrap();
        println!("{:?}: {} answer(s)", opt, out.answers.len());
    }
}
