//! Fits the noise parameters of the bundled configuration and prints the
//! resulting observables and TOML values.

use std::time::Instant;

use fivephoton::harness::{calibrate, observables, rate_model, run_table1, CalibrationTargets};
use fivephoton::DeviceConfig;

fn main() -> fivephoton::Result<()> {
    let base = DeviceConfig::fitted();
    let t = Instant::now();
    println!("bundled: {:?} ({:?})", observables(&base)?, t.elapsed());
    let cfg = calibrate(&base, &CalibrationTargets::default())?;
    println!("fitted in {:?}", t.elapsed());
    println!("pair_prob = {:e}", cfg.pair_prob);
    println!("pbs_extinction = {}", cfg.pbs_extinction);
    println!("overlap12 = {}", cfg.overlap12);
    println!("overlap34 = {}", cfg.overlap34);
    println!("{:?}", observables(&cfg)?);
    println!("{:?}", rate_model(&cfg)?);
    for c in run_table1(&cfg)?.fidelities {
        println!("{} @{}: {:.4}", c.input, c.location, c.fidelity);
    }
    Ok(())
}
