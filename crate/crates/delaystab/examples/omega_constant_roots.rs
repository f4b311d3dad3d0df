//! Characteristic roots of a single delayed mode, branch by branch.
//!
//! For `lambda = mu + kappa e^{-lambda tau}` every root is a Lambert-W
//! branch value; the scan certifies each root by direct substitution.

use delaystab::roots::rightmost_roots;

fn main() {
    let (mu, kappa, tau) = (0.0, 1.0, 1.0);
    println!("roots of lambda = {mu} + {kappa} e^(-{tau} lambda), rightmost first\n");
    println!("{:>4} {:>22} {:>22} {:>12}", "br", "Re", "Im", "residual");
    let scan = rightmost_roots(mu, kappa, tau, 7, 1e-12).expect("scan");
    for r in &scan.roots {
        println!("{:>4} {:>22.15} {:>22.15} {:>12.2e}", r.branch, r.re, r.im, r.residual);
    }
    println!(
        "\nthe rightmost root {:.12} is the growth rate the open-loop simulation reproduces",
        scan.roots[0].re
    );
}
