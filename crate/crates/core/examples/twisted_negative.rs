//! The negative structure constant of the twisted pairs at levels divisible by the length ratio.
use affine_fusion::pieri::{fusion_ring, negative_fusion_expected, negative_fusion_weights};
use affine_fusion::rootdata::{PairKind, RootDatum, RootType};

fn main() -> affine_fusion::Result<()> {
    for ty in [RootType::B(2), RootType::C(2), RootType::G2] {
        for c in 2..=4 {
            let d = RootDatum::new(ty, PairKind::Twisted)?;
            let table = fusion_ring(&d, c)?;
            let theta = d.quasi_minuscule_weight();
            let negatives: Vec<String> = negative_fusion_weights(&d, c)?
                .iter()
                .map(|l| {
                    format!(
                        "c^{l}_({l},{theta}) = {}",
                        table.integer(l, &theta, l).expect("integral at t = 0")
                    )
                })
                .collect();
            let min = table
                .integers
                .as_ref()
                .and_then(|v| v.iter().min().copied())
                .expect("integral at t = 0");
            let expected = if negative_fusion_expected(&d, c) {
                "negative expected"
            } else {
                "nonnegative expected"
            };
            println!(
                "{ty} twisted c={c}: {expected}, min coefficient {min}  {}",
                negatives.join(", ")
            );
        }
    }
    Ok(())
}
