//! Moves lattice points into the level-c alcove and reports the word and `t[lambda]`.
use affine_fusion::affine::{enumerate_pc, project_to_alcove};
use affine_fusion::rootdata::{PairKind, RootDatum, RootType, Weight};

fn main() -> affine_fusion::Result<()> {
    let d = RootDatum::new(RootType::B(2), PairKind::Twisted)?;
    let c = 3;
    let pc: Vec<String> = enumerate_pc(&d, c)?.iter().map(|w| w.to_string()).collect();
    println!("P_{c} = {{{}}}", pc.join(", "));
    for lambda in [
        Weight(vec![5, -2]),
        Weight(vec![-4, 7]),
        Weight(vec![-1, -1]),
        Weight(vec![9, 9]),
    ] {
        let p = project_to_alcove(&d, &lambda, c)?;
        println!(
            "{lambda} -> {} via {:?}, t[lambda] = {}",
            p.lambda_plus, p.word, p.t_weight
        );
    }
    Ok(())
}
