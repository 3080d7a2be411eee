//! Group averages of points, functionals and operators.

use invbanach::attainment::operator_norm;
use invbanach::invariance::{is_invariant_operator, symmetrize_functional, symmetrize_operator, symmetrize_point};
use invbanach::perm_group::{orbits, Family};
use invbanach::{NormSpec, Operator, PermutationGroup};

fn main() -> invbanach::Result<()> {
    let g = PermutationGroup::on_blocks(5, &[vec![0, 1, 2], vec![3, 4]], Family::Dihedral, 1000)?;
    println!("|G| = {}, orbits (1-based) {:?}", g.order(), orbits(&g).one_based());

    let x = [3.0, 0.0, 0.0, 1.0, -1.0];
    println!("x  = {x:?}\nx̄  = {:?}", symmetrize_point(&x, &g)?);
    let f = [1.0, 2.0, 3.0, 0.0, 4.0];
    println!("f̄  = {:?}", symmetrize_functional(&f, &g)?);

    let t = Operator::from_rows(&[vec![1.0, 0.0, -1.0, 2.0, 0.0], vec![0.0, 3.0, 0.0, 0.0, 1.0]], NormSpec::Linf, NormSpec::L1)?;
    let s = symmetrize_operator(&t, &g)?;
    println!("T̄ = {:?}", s.rows_vec());
    println!(
        "‖T‖ = {:.6}, ‖T̄‖ = {:.6}, T̄ invariant: {}",
        operator_norm(&t)?.operator_norm,
        operator_norm(&s)?.operator_norm,
        is_invariant_operator(&s, &g)?
    );
    Ok(())
}
