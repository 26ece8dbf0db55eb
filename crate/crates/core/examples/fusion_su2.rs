//! su(2) fusion at level c from the t = 0 structure constants.
use affine_fusion::pieri::fusion_ring;
use affine_fusion::rootdata::{PairKind, RootDatum, RootType, Weight};

fn main() -> affine_fusion::Result<()> {
    let d = RootDatum::new(RootType::A(1), PairKind::Untwisted)?;
    let c = 4;
    let table = fusion_ring(&d, c)?;
    for a in 0..=c {
        for b in a..=c {
            let products: Vec<String> = (0..=c)
                .filter(|&e| {
                    table.integer(&Weight(vec![a]), &Weight(vec![b]), &Weight(vec![e])) == Some(1)
                })
                .map(|e| format!("[{e}]"))
                .collect();
            println!("[{a}] x [{b}] = {}", products.join(" + "));
        }
    }
    Ok(())
}
