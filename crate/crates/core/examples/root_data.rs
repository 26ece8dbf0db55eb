//! Root data of the admissible pairs: marks, Coxeter numbers, (quasi-)minuscule weights.
use affine_fusion::rootdata::{PairKind, RootDatum, RootType};

fn main() -> affine_fusion::Result<()> {
    for ty in [
        RootType::A(2),
        RootType::B(3),
        RootType::C(3),
        RootType::G2,
        RootType::D(4),
        RootType::F4,
    ] {
        for pair in [PairKind::Untwisted, PairKind::Twisted] {
            if pair == PairKind::Twisted && ty.is_simply_laced() {
                continue;
            }
            let d = RootDatum::new(ty, pair)?;
            let minuscule: Vec<String> = d
                .minuscule_weights()
                .iter()
                .map(|w| w.to_string())
                .collect();
            println!(
                "{ty} {pair:?}: |R+| = {}, marks {:?}, hat marks {:?}, h = {}, theta = {}, minuscule [{}]",
                d.positive_roots.len(),
                d.marks,
                d.hat_marks,
                d.coxeter_h,
                d.quasi_minuscule_weight(),
                minuscule.join(", ")
            );
        }
    }
    Ok(())
}
