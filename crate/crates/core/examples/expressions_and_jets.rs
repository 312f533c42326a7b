//! Parse an expression, evaluate it, and read partial derivatives off its
//! order-3 Taylor jet.

use warpcurv::expr::ScalarExpr;
use warpcurv::jet::{Elementary, Jet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = ScalarExpr::parse("exp(x*y) + sin(z)^2", &["x", "y", "z"])?;
    let p = [0.3, -0.7, 0.4];
    println!("f = {e}");
    println!("f(p) = {:.12}", e.eval(&p)?);

    let j = e.eval_jet(&p, 3)?;
    for alpha in [[1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 2], [0, 0, 3]] {
        println!("d^{alpha:?} f = {:+.12}", j.partial(&alpha)?);
    }

    // jets compose with elementary functions directly
    let x = Jet::variable(0, 0.5, 1, 3)?;
    let s = x.compose(Elementary::Sin)?;
    println!("sin jet at 0.5: {:?}", s.coeffs());

    match ScalarExpr::parse("log(x)", &["x"])?.eval_jet(&[-1.0], 2) {
        Ok(_) => unreachable!(),
        Err(err) => println!("domain error: {err}"),
    }
    Ok(())
}
