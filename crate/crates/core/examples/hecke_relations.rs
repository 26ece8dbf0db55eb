//! Quadratic and braid relations of the integral-reflection operators, in exact arithmetic.
use affine_fusion::hecke::{
    braid_failures, hashed_test_function, quadratic_failures, sample_lattice_points, HeckeRep,
};
use affine_fusion::rootdata::{PairKind, RootDatum, RootType};
use affine_fusion::tring::{parse_rational, TParams};

fn main() -> affine_fusion::Result<()> {
    let t = TParams {
        short: parse_rational("1/3")?,
        long: parse_rational("-1/2")?,
    };
    for (ty, pair) in [
        (RootType::A(2), PairKind::Untwisted),
        (RootType::C(2), PairKind::Twisted),
        (RootType::G2, PairKind::Untwisted),
    ] {
        let d = RootDatum::new(ty, pair)?;
        let rep = HeckeRep::new(&d, 3, t.clone())?;
        let points = sample_lattice_points(d.rank, 50, 6, 1);
        let f = hashed_test_function(11);
        println!(
            "{ty} {pair:?}: quadratic failures {}, braid failures {} over {} points",
            quadratic_failures(&rep, &f, &points),
            braid_failures(&rep, &f, &points),
            points.len()
        );
    }
    Ok(())
}
