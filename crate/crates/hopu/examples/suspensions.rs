//! The term kernel: explicit-substitution terms, destructive rewriting
//! with a trail, and lazy head normalization that leaves argument
//! suspensions unevaluated.
//!
//!     cargo run -p hopu --example suspensions

use hopu::normalize::head_norm;
use hopu::term::{Node, Store};

fn main() {
    let mut st = Store::new();
    let a = {
        let s = st.intern_sym("a", 0);
        st.mk_const(s, 0, vec![])
    };
    let b = {
        let s = st.intern_sym("b", 0);
        st.mk_const(s, 0, vec![])
    };

    // ((\ ((\\ ((#1 #2) #3)) t2)) t3) with t2 = a b and t3 = b a
    let t2 = st.mk_app(a, vec![b]);
    let t3 = st.mk_app(b, vec![a]);
    let db1 = st.mk_db(1);
    let db2 = st.mk_db(2);
    let db3 = st.mk_db(3);
    let body = st.mk_app(db1, vec![db2, db3]);
    let inner = st.mk_abs(2, body);
    let redex = st.mk_app(inner, vec![t2]);
    let outer = st.mk_abs(1, redex);
    let top = st.mk_app(outer, vec![t3]);

    let mark = st.mark();
    let view = head_norm(&mut st, top);
    println!("binder length: {}", view.binder);
    println!("head: {:?}", st.node(view.head));
    for (i, arg) in view.args.iter().enumerate() {
        match st.node(*arg) {
            Node::Susp { ol, nl, env, .. } => println!(
                "arg {}: suspension with ol={}, nl={}, env of length {} (not yet evaluated)",
                i + 1,
                ol,
                nl,
                env.len()
            ),
            other => println!("arg {}: {:?}", i + 1, other),
        }
    }

    // every rewriting step was trailed; unwinding restores the redex
    st.undo_to(mark);
    println!(
        "after undo, the top node is an application again: {:?}",
        matches!(st.node(top), Node::App { .. })
    );
}
