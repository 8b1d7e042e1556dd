use omma::metrics::list_metrics;

use crate::error::CliResult;

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// One row per registered (averaging, base) pair.
pub fn table() -> String {
    let mut s = format!("{:<24} {:<8} {}\n", "metric", "concave", "smooth");
    for info in list_metrics() {
        for avg in &info.averagings {
            let name = format!("{}-{}", avg.prefix(), info.name);
            s.push_str(&format!("{name:<24} {:<8} {}\n", yes_no(info.concave), yes_no(info.smooth)));
        }
    }
    s
}

pub fn metrics() -> CliResult<()> {
    print!("{}", table());
    Ok(())
}
