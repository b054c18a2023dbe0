//! CSV emission: `,` separators, `.` decimals, `\n` endings and 17
//! significant digits regardless of locale.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fiberdd::dephasing::CurvePoint;

use crate::error::CliError;

pub const CURVE_HEADER: &str = "L,f_L,gamma,concurrence";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn point_fields(p: &CurvePoint) -> String {
    format!(
        "{},{},{},{}",
        num(p.length),
        num(p.f_l),
        num(p.gamma),
        num(p.concurrence)
    )
}

pub struct Table {
    text: String,
}

impl Table {
    /// `comments` become leading `# ` lines.
    pub fn new(comments: &[String], extra_columns: &[&str]) -> Self {
        let mut text = String::new();
        for c in comments {
            for line in c.lines() {
                let _ = writeln!(text, "# {line}");
            }
        }
        for col in extra_columns {
            text.push_str(col);
            text.push(',');
        }
        text.push_str(CURVE_HEADER);
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, extra: &[&str], p: &CurvePoint) {
        for field in extra {
            self.text.push_str(field);
            self.text.push(',');
        }
        self.text.push_str(&point_fields(p));
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, &self.text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
    }

    #[cfg(test)]
    pub fn as_str(&self) -> &str {
        &self.text
    }
}
