//! Norms, dual norms and unit-ball vertices for the supported kinds.

use invbanach::norms::{dual_norm, norm, supporting_functional, unit_ball_vertices, vertex_count};
use invbanach::NormSpec;

fn main() -> invbanach::Result<()> {
    let x = [0.5, -1.0, 0.25, 0.0];
    let w = vec![0.8, 0.6, 0.4, 0.2];
    let specs = [
        NormSpec::L1,
        NormSpec::L2,
        NormSpec::lp(3.0)?,
        NormSpec::Linf,
        NormSpec::lorentz_d(w.clone())?,
        NormSpec::lorentz_predual(w.clone())?,
        NormSpec::xw(w)?,
        NormSpec::strict_c0(),
    ];
    println!("{:<16} {:>10} {:>10} {:>10}", "kind", "norm", "dual", "vertices");
    for spec in &specs {
        let f = supporting_functional(&x, spec)?;
        let count = vertex_count(spec, x.len()).map_or("-".to_string(), |c| c.to_string());
        println!("{:<16} {:>10.6} {:>10.6} {:>10}", spec.name(), norm(&x, spec)?, dual_norm(&f, spec)?, count);
    }
    let verts = unit_ball_vertices(&NormSpec::xw(vec![0.5, 0.3])?, 2)?;
    println!("X(w) unit ball in the plane: {verts:?}");
    Ok(())
}
