//! Affine Weyl invariance of Phi_xi at points far from the alcove, in 192-bit fixed point.
use affine_fusion::nodes::solve_all;
use affine_fusion::precise::invariance_defect;
use affine_fusion::rootdata::{PairKind, RootDatum, RootType};
use affine_fusion::tring::TParams;

fn main() -> affine_fusion::Result<()> {
    let t = TParams {
        short: 0.4,
        long: -0.3,
    };
    for (ty, pair) in [
        (RootType::A(2), PairKind::Untwisted),
        (RootType::B(2), PairKind::Twisted),
        (RootType::G2, PairKind::Untwisted),
    ] {
        let d = RootDatum::new(ty, pair)?;
        let t = if ty.is_simply_laced() {
            TParams::uniform(t.short)
        } else {
            t.clone()
        };
        for node in solve_all(&d, 3, &t)?.iter().take(3) {
            let defect = invariance_defect(&d, 3, &t, node, 10, 1)?;
            println!(
                "{ty} {pair:?} mu = {:?}: max defect {defect:.1e}",
                node.mu.0
            );
        }
    }
    Ok(())
}
