//! Spectral nodes from the convex potential, against the `t = 0` closed form.
use affine_fusion::nodes::{closed_form_node, solve_all};
use affine_fusion::rootdata::{PairKind, RootDatum, RootType};
use affine_fusion::tring::TParams;

fn main() -> affine_fusion::Result<()> {
    let d = RootDatum::new(RootType::A(2), PairKind::Untwisted)?;
    let c = 3;
    for t in [0.3, -0.7] {
        println!("t = {t}");
        for n in solve_all(&d, c, &TParams::uniform(t))? {
            let x0 = closed_form_node(&d, &n.mu, c);
            println!(
                "  mu {:?}: xi = {:.6?} (t = 0: {:.6?}), {} Newton steps, Bethe residual {:.1e}",
                n.mu.0, n.xi, x0, n.iterations, n.bethe_residual
            );
        }
    }
    Ok(())
}
