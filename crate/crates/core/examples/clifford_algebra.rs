//! Builds the Dirac matrices and the real 8×8 symbols, then runs the algebra
//! suite over random wave vectors.

use dirac_eq::checks::algebra_checks;
use dirac_eq::clifford::{build_dirac_matrices, max_abs, Mat8, RealSymbols};
use dirac_eq::WaveVector;

fn main() -> dirac_eq::Result<()> {
    let d = build_dirac_matrices();
    let mut worst = 0.0_f64;
    for a in 0..3 {
        worst = worst.max((d.alpha[a] * d.beta + d.beta * d.alpha[a]).camax());
    }
    println!("max |{{α_k, β}}| = {worst:.3e}");

    let symbols = RealSymbols::new(1.0)?;
    let k = WaveVector::new(0.3, -1.2, 0.7);
    let p = symbols.symbol_p(&k);
    let omega = symbols.dispersion(&k);
    println!("ω(k) = {omega:.6}, |P² + ω²| = {:.3e}", max_abs(&(p * p + Mat8::identity().scale(omega * omega))));

    for c in algebra_checks(1.0, 1000, 7)? {
        println!("{:<40} {:.3e}  {}", c.name, c.value, if c.passed { "ok" } else { "FAIL" });
    }
    Ok(())
}
