use std::io::{self, Write};

use super::Trajectory;
use crate::serial::decimal_sig;

const SIG_DIGITS: usize = 12;

/// Writes `t,x1..xN,o1..oN` rows followed by a `#` line with the terminal
/// label and residual.
pub fn write_trajectory_csv<W: Write>(t: &Trajectory, mut w: W) -> io::Result<()> {
    let n = t.states.first().map_or(0, |s| s.n());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("o{i}")));
    writeln!(w, "{}", header.join(","))?;
    for (time, s) in t.times.iter().zip(&t.states) {
        let mut row = Vec::with_capacity(2 * n + 1);
        row.push(decimal_sig(*time, SIG_DIGITS));
        row.extend(s.components().map(|v| decimal_sig(v, SIG_DIGITS)));
        writeln!(w, "{}", row.join(","))?;
    }
    writeln!(
        w,
        "# terminal={} residual={:e}",
        t.terminal.outcome, t.terminal.residual
    )
}

pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(t, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::State;

    #[test]
    fn layout() {
        let t = Trajectory::constant(State::new(vec![0.25, 1.0], vec![0.5, 0.0]).unwrap(), 0.0, true, None);
        let text = trajectory_csv(&t);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,o1,o2");
        assert_eq!(
            lines[1],
            "0.00000000000,0.250000000000,1.00000000000,0.500000000000,0.00000000000"
        );
        assert_eq!(lines[2], "# terminal=Interior residual=0e0");
    }
}
