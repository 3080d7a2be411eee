//! Alpha, quasi-alpha and beta certificates for block groups.

use invbanach::certificates::{build_alpha_ell1, dualize_alpha, verify_alpha, verify_beta, verify_quasi_alpha};
use invbanach::perm_group::Family;
use invbanach::PermutationGroup;

fn main() -> invbanach::Result<()> {
    let g = PermutationGroup::on_blocks(6, &[vec![0, 1], vec![2, 3, 4]], Family::Cyclic, 1000)?;
    let alpha = build_alpha_ell1(&g, 6)?;
    for p in &alpha.pairs {
        println!("x = {:?}  x* = {:?}", p.point, p.functional);
    }
    let a = verify_alpha(&alpha)?;
    println!("alpha: passed {}, observed rho {}", a.passed(), a.rho_observed);
    println!("quasi-alpha: passed {}", verify_quasi_alpha(&alpha)?.passed());
    let beta = dualize_alpha(&alpha)?;
    println!("beta on {}: passed {}", beta.spec.name(), verify_beta(&beta)?.passed());
    Ok(())
}
