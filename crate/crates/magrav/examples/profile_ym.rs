//! Scratch profiling driver (temporary).
use std::time::Instant;
use magrav::symexpr::zerotest::ZeroCfg;
use magrav::variational::{
    energy_momentum_report, invariance_identities, komar_report, noether_identities, yang_mills,
    JetContext, OnShellSampler,
};

fn main() {
    let cfg = ZeroCfg::with_samples(8).seed(7);
    let ctx = JetContext::new(2).unwrap();
    let l = yang_mills(&ctx);

    let t0 = Instant::now();
    let r = invariance_identities(&l, &cfg).unwrap();
    println!("invariance (dim 2): passed={} in {:?}", r.passed(), t0.elapsed());

    let t0 = Instant::now();
    let r = noether_identities(&l, &cfg).unwrap();
    println!("noether (dim 2): passed={} in {:?}", r.passed(), t0.elapsed());

    let t0 = Instant::now();
    let r = komar_report(&l, false, &cfg).unwrap();
    println!("komar (dim 2): passed={} in {:?}", r.passed(), t0.elapsed());

    let t0 = Instant::now();
    let r = energy_momentum_report(&l, OnShellSampler::ZeroCurvature, &cfg).unwrap();
    println!("energy-momentum (dim 2): passed={} in {:?}", r.passed(), t0.elapsed());
    println!("{r}");
}
