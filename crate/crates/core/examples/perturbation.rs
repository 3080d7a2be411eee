//! Lindenstrauss iteration, quasi-alpha and beta perturbations.

use invbanach::attainment::operator_norm;
use invbanach::certificates::{build_alpha_ell1, dualize_alpha};
use invbanach::perm_group::Family;
use invbanach::perturbation::{beta_perturb, epsilon_schedule, lindenstrauss_iterate, quasi_alpha_perturb, LindenstraussOptions};
use invbanach::{NormSpec, Operator, PermutationGroup};

fn main() -> invbanach::Result<()> {
    let g = PermutationGroup::on_blocks(4, &[vec![0, 1], vec![2, 3]], Family::Symmetric, 100)?;
    let rows = [vec![1.0, 1.0, 0.5, 0.5], vec![0.2, 0.2, -1.0, -1.0]];

    println!("schedule for eps = 0.3: {:?}", epsilon_schedule(0.3, 3)?.terms);
    let t = Operator::from_rows(&rows, NormSpec::Linf, NormSpec::L2)?;
    let opts = LindenstraussOptions { min_steps: 3, ..Default::default() };
    let res = lindenstrauss_iterate(&t, &g, 0.3, &opts)?;
    for r in &res.trace {
        println!("k = {} eps_k = {:.3e} ‖T_k‖ = {:.6} defect = {:.2e}", r.k, r.eps_k, r.norm_tk, r.defect_k);
    }
    println!("drift {:.3e}", res.drift);

    let t = Operator::from_rows(&rows, NormSpec::L1, NormSpec::L2)?;
    let q = quasi_alpha_perturb(&t, &build_alpha_ell1(&g, 4)?, &g, 0.5, 0.2)?;
    println!("quasi-alpha: λ0 = {}, peak {:.6} >= {:.6}, others {:.6} <= {:.6}", q.lambda0, q.peak, q.peak_bound, q.others, q.others_bound);

    let t = Operator::from_rows(&rows, NormSpec::L1, NormSpec::Linf)?;
    let cert = dualize_alpha(&build_alpha_ell1(&PermutationGroup::trivial(2), 2)?)?;
    let b = beta_perturb(&t, &cert, &g, 0.4, 0.05)?;
    println!(
        "beta: λ0 = {}, ‖S − T‖ = {:.6} <= {:.6}, attained {} ({})",
        b.lambda0,
        b.distance,
        0.4 * b.norm_t,
        b.attained,
        operator_norm(&b.operator)?.operator_norm
    );
    Ok(())
}
