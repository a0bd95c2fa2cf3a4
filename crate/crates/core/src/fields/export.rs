use std::io::{self, Write};

use super::sampler::Realization;

/// Writes `i,j[,k],value` rows with 1-based lattice coordinates.
pub fn write_realization_csv<W: Write>(r: &Realization, mut out: W) -> io::Result<()> {
    let d = r.window.dim();
    let header = ["i", "j", "k"][..d].join(",");
    writeln!(out, "{header},value")?;
    let line = r.window.line_len();
    for (l, chunk) in r.values.chunks(line).enumerate() {
        let prefix: Vec<String> = r
            .window
            .line_prefix(l)
            .iter()
            .map(|p| (p + 1).to_string())
            .collect();
        let prefix = prefix.join(",");
        for (k, v) in chunk.iter().enumerate() {
            writeln!(out, "{prefix},{},{v:?}", k + 1)?;
        }
    }
    Ok(())
}
