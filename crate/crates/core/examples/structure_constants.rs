//! The full structure-constant table at generic t and its algebra axioms.
use affine_fusion::pieri::{structure_constants, unit_coefficient};
use affine_fusion::rootdata::{PairKind, RootDatum, RootType};
use affine_fusion::tring::TParams;

fn main() -> affine_fusion::Result<()> {
    let d = RootDatum::new(RootType::C(3), PairKind::Twisted)?;
    let (c, t) = (
        2,
        TParams {
            short: 0.5,
            long: 0.25,
        },
    );
    let table = structure_constants(&d, c, &t)?;
    let unit = unit_coefficient(&d);
    println!(
        "dimension {}, solve residual {:.1e}",
        table.size(),
        table.residual
    );
    println!(
        "commutativity {:.1e}, associativity {:.1e}",
        table.commutativity_defect(),
        table.associativity_defect()
    );
    println!(
        "unit M_0 = W_0(t) = {unit} = {}, defect {:.1e}",
        unit.eval_f64(&t)?,
        table.unit_defect(unit.eval_f64(&t)?)
    );
    Ok(())
}
