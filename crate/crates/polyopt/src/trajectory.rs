use polyopt_core::mpc::Trajectory;
use std::io::Write;

use crate::error::Error;

/// Writes `step, <states>, <inputs>, j_star, solve_ms`. Missing values (the
/// final state, free-response solves) are left empty.
pub fn write_csv<W: Write>(out: W, traj: &Trajectory, states: &[String], inputs: &[String]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string()];
    header.extend(states.iter().cloned());
    header.extend(inputs.iter().cloned());
    header.extend(["j_star".to_string(), "solve_ms".to_string()]);
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for s in &traj.steps {
        let mut row = vec![s.step.to_string()];
        row.extend(s.x.iter().map(f64::to_string));
        match &s.u {
            Some(u) => row.extend(u.iter().map(f64::to_string)),
            None => row.extend(inputs.iter().map(|_| String::new())),
        }
        row.push(opt(s.j_star));
        row.push(opt(s.solve_ms));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
    Ok(())
}
