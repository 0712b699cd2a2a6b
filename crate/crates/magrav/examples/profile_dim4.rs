use magrav::brst::nilpotency_check;
use magrav::variational::JetContext;

fn main() {
    let ctx = JetContext::new(4).unwrap();
    let t = std::time::Instant::now();
    let report = nilpotency_check(&ctx).unwrap();
    println!(
        "nilpotency dim 4: passed={} proven={} in {:?}",
        report.passed(),
        report.all_proven(),
        t.elapsed()
    );
    println!("{report}");
}
