//! Slices, A_eps membership and absolutely exposing operators.

use invbanach::attainment::{absolutely_exposing_check, eta_grid, in_a_eps, slice};
use invbanach::{NormSpec, Operator, PermutationGroup};

fn main() -> invbanach::Result<()> {
    let g = PermutationGroup::trivial(2);
    let b = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0], vec![0.6, 0.6]];
    let t = Operator::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]], NormSpec::L2, NormSpec::L2)?;
    for eta in eta_grid(2.0).into_iter().take(4) {
        println!("η = {eta:<6} slice {:?}", slice(&t, &b, &g, eta)?.members);
    }
    let a = in_a_eps(&t, &b, &g, 0.1)?;
    println!("in A_0.1: {} at η = {:?}, p = {:?}", a.member, a.eta, a.p);
    let e = absolutely_exposing_check(&t, &b, &g)?;
    println!("exposing: {} at x = {:?} from η = {:?}", e.exposing, e.x, e.collapse_eta);

    let zero = Operator::zero(2, 2, NormSpec::L2, NormSpec::L2)?;
    println!("zero operator in A_0.1: {}", in_a_eps(&zero, &b, &g, 0.1)?.member);
    Ok(())
}
