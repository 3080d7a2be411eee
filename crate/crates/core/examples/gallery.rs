//! Invariant operators far from every truncated operator.

use invbanach::gallery::{
    auxlemma_witness, build_c0_counterexample, build_dstar_counterexample, build_xw_counterexample,
    distance_to_truncated, jensen_violations,
};
use invbanach::perm_group::Family;
use invbanach::PermutationGroup;

fn main() -> invbanach::Result<()> {
    let blocks = [vec![0, 1], vec![2, 3, 4], vec![5, 6]];
    let g = PermutationGroup::on_blocks(7, &blocks, Family::Cyclic, 1000)?;
    let w = [0.8, 0.8, 0.5, 0.5, 0.5, 0.3, 0.3];
    let ops = [
        build_c0_counterexample(&g, 7)?,
        build_dstar_counterexample(&g, &w, 2.0, 3)?,
        build_xw_counterexample(&g, &w, 3)?,
    ];
    for op in &ops {
        let rep = distance_to_truncated(op, 2, 500, 1)?;
        println!(
            "{:<6} certified {:.6}, sampled min {:.6} over {} truncations",
            op.construction.name(),
            rep.certified_bound,
            rep.empirical_min,
            rep.trials
        );
    }
    println!("jensen violations: {}", jensen_violations(&ops[1], 3, 10_000, 2)?);

    let wit = auxlemma_witness(&[0.5, 0.5, 0.3, 0.2], &PermutationGroup::cyclic(4)?)?;
    println!("x = {:?}, ‖x‖ = {:.6}, ‖g(x)‖ = {:.6}", wit.x, wit.norm_x, wit.norm_gx);
    Ok(())
}
