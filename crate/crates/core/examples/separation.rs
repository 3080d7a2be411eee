//! Invariant separation, margins and the swap obstruction.

use invbanach::invariance::symmetrize_functional;
use invbanach::separation::{minkowski_functional, separate, separate_invariant, separate_with_margin};
use invbanach::{ConvexBody, NormSpec, PermutationGroup};

fn main() -> invbanach::Result<()> {
    let swap = PermutationGroup::symmetric(2)?;
    let c = ConvexBody::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], true)?;
    let x0 = [2.0, 2.0];
    let s = separate_invariant(&c, &swap, &x0)?;
    println!("invariant separator {:?}, margin {:.6}", s.functional, s.margin);
    let m = separate_with_margin(&c, &swap, &x0, 0.5, &NormSpec::L1)?;
    println!("margin-normalized separator {:?}, margin {:.6}", m.functional, m.margin);
    println!("gauge of x0: {:.6}", minkowski_functional(&c, &x0)?);

    // (t, −t) is separated from the origin, but every invariant functional vanishes on it
    let origin = ConvexBody::new(vec![vec![0.0, 0.0]], false)?;
    let p = [1.0, -1.0];
    let classical = separate(&origin, &p)?;
    let averaged = symmetrize_functional(&classical.functional, &swap)?;
    println!("classical {:?}, averaged {:?}", classical.functional, averaged);
    println!("separate_invariant: {:?}", separate_invariant(&origin, &swap, &p).unwrap_err());
    Ok(())
}
