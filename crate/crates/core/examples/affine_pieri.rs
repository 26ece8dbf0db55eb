//! Exact affine Pieri coefficients, checked against the numerical expansion.
use affine_fusion::pieri::{lr_pieri, pieri_weights, structure_constants};
use affine_fusion::rootdata::{PairKind, RootDatum, RootType, Weight};
use affine_fusion::tring::TParams;

fn main() -> affine_fusion::Result<()> {
    let d = RootDatum::new(RootType::B(2), PairKind::Untwisted)?;
    let (c, t) = (
        3,
        TParams {
            short: 0.3,
            long: -0.3,
        },
    );
    let table = structure_constants(&d, c, &t)?;
    let lambda = Weight(vec![1, 1]);
    for omega in pieri_weights(&d) {
        println!("lambda = {lambda}, omega = {omega}");
        for (nu, p) in lr_pieri(&d, &lambda, &omega, c)? {
            let numeric = table.get(&lambda, &omega, &nu).expect("nu in P_c");
            println!(
                "  nu = {nu}: {p} = {:.12} (solve: {:.12})",
                p.eval_f64(&t)?,
                numeric.re
            );
        }
    }
    Ok(())
}
