//! Periodic spherical functions at the nodes: the basis matrix and its conditioning.
use affine_fusion::hecke::HeckeRep;
use affine_fusion::rootdata::{PairKind, RootDatum, RootType};
use affine_fusion::spherical::basis_matrix;
use affine_fusion::tring::TParams;
use num_complex::Complex64;

fn main() -> affine_fusion::Result<()> {
    let d = RootDatum::new(RootType::G2, PairKind::Untwisted)?;
    let (c, t) = (
        3,
        TParams {
            short: 0.4,
            long: -0.2,
        },
    );
    let b = basis_matrix(&d, c, &t)?;
    println!(
        "{} x {} basis matrix, condition number {:.3}",
        b.rows.len(),
        b.nodes.len(),
        b.condition
    );
    let rep = HeckeRep::new(&d, c, t.map(|&x| Complex64::new(x, 0.0)))?;
    for (k, node) in b.nodes.iter().enumerate() {
        let phi = rep.Phi(&node.xi)?;
        let gap = b
            .rows
            .iter()
            .enumerate()
            .map(|(i, l)| (phi.eval(l) - b.entries[(i, k)]).norm())
            .fold(0.0, f64::max);
        println!(
            "  mu {:?}: max |Phi(lambda) - M_lambda(xi)| = {gap:.1e}",
            node.mu.0
        );
    }
    Ok(())
}
