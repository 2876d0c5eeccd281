//! The unification layer on hand-built terms: raising and pruning
//! produce one most general unifier for a flexible-flexible pair whose
//! variables see different parts of the signature.
//!
//!     cargo run -p hopu --example pattern_unify

use hopu::normalize::full_normalize;
use hopu::term::Store;
use hopu::unify::{unify_pairs, Residuals};

fn main() {
    let mut st = Store::new();
    // constants c1..c5 introduced at successively deeper scopes
    let cs: Vec<_> = (1..=5)
        .map(|i| {
            let sym = st.intern_sym(&format!("c{}", i), i);
            st.mk_const(sym, i, vec![])
        })
        .collect();
    // X and Y both predate every constant
    let x = st.fresh_var(0);
    let y = st.fresh_var(0);
    let lhs = st.mk_app(x, vec![cs[3], cs[0], cs[1], cs[2]]);
    let rhs = st.mk_app(y, vec![cs[4], cs[1], cs[0], cs[2]]);

    println!("unifying  (X c4 c1 c2 c3)  with  (Y c5 c2 c1 c3)");
    let mut residuals = Residuals::default();
    let outcome = unify_pairs(&mut st, &mut residuals, vec![(lhs, rhs)]).unwrap();
    println!("bound anything: {}", outcome.bound);

    // c4 and c5 cannot appear in any unifier (each is invisible to the
    // other variable), and the common elements c1, c2, c3 survive in
    // both bindings, selected by position.
    println!("X := {:?}", full_normalize(&mut st, x));
    println!("Y := {:?}", full_normalize(&mut st, y));
}
