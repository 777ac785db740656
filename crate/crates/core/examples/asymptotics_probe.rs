//! Prints the full modified-scattering report for the two reference systems
//! at the default configuration. Used to eyeball decay rates and transients
//! before tightening test bands.

use nlslab_core::{example_a, example_b, pde::run_asymptotics, AsymptoticsConfig};

fn main() {
    let cfg = AsymptoticsConfig::default();
    println!(
        "config: eps={} n={} ell={:.3} dt={} t=[{},{}] samples={} window=({},{})",
        cfg.eps,
        cfg.n,
        cfg.ell,
        cfg.dt,
        cfg.t_start,
        cfg.t_end,
        cfg.samples,
        cfg.fit_window.0,
        cfg.fit_window.1
    );
    for (name, system) in [("coupled", example_b()), ("family-half", example_a(0.5))] {
        let start = std::time::Instant::now();
        let report = run_asymptotics(&system, &cfg).expect("asymptotics run failed");
        println!(
            "\n== {name} ({:.1}s) ==\nlinf_slope={:.4} l2_slope={:.4} y_proxy={:.4e}",
            start.elapsed().as_secs_f64(),
            report.linf_slope,
            report.l2_slope,
            report.y_proxy
        );
        println!("      t    linf_err     l2_err      w_sup  w_mismatch");
        for i in 0..report.sample_times.len() {
            if i % 5 == 0 || i + 1 == report.sample_times.len() {
                println!(
                    "{:9.2}  {:.4e}  {:.4e}  {:.5}  {:.4e}",
                    report.sample_times[i],
                    report.linf_error[i],
                    report.l2_error[i],
                    report.w_sup[i],
                    report.w_mismatch[i]
                );
            }
        }
    }
}
