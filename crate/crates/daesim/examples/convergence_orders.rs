//! Measured convergence orders on the scalar linear DAE:
//! second order for the extrapolated algebraic estimate and the
//! trapezoidal scheme, first order for the hold-previous estimate.

use daesim::io::study::{convergence_study, StudyTarget};
use daesim::models::scalar::ScalarLinearDae;
use daesim::SchemeKind;

fn main() -> daesim::Result<()> {
    let model = ScalarLinearDae { a: -2.0, b: 1.0, c: 1.0 };
    let hs = [0.02, 0.01, 0.005, 0.0025];
    let studies = [
        ("extrapolated estimate", StudyTarget::ExtrapolateEstimate),
        ("hold-previous estimate", StudyTarget::HoldEstimate),
        ("simultaneous trapezoidal", StudyTarget::Scheme(SchemeKind::SimultaneousItm)),
        ("partitioned + extrapolation", StudyTarget::Scheme(SchemeKind::PartitionedPredict)),
    ];
    for (name, target) in studies {
        let r = convergence_study(&model, 1.0, 1.0, target, &hs)?;
        println!("{name}:");
        for (h, e) in r.hs.iter().zip(&r.errors) {
            println!("  h = {h:<7} error = {e:.3e}");
        }
        println!("  fitted order: {:.3}", r.slope);
    }
    Ok(())
}
