use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let mut failed = 0;
    for c in parastat_validation::criteria() {
        let start = Instant::now();
        let (pass, detail) = match (c.run)() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} #{:<2} {}: {detail} [{:.1} s]", c.id, c.name, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} of 12 acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
