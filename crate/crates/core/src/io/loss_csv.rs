use crate::error::{DcaError, Result};

/// `iteration,loss` with 17 significant digits, LF line endings.
pub fn write_loss_csv(history: &[f64]) -> String {
    let mut out = String::from("iteration,loss\n");
    for (i, loss) in history.iter().enumerate() {
        out.push_str(&format!("{i},{loss:.16e}\n"));
    }
    out
}

pub fn parse_loss_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "iteration,loss")) => {}
        _ => return Err(DcaError::parse(1, "missing header \"iteration,loss\"")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let (iter, loss) = line
            .split_once(',')
            .ok_or_else(|| DcaError::parse(lineno, "expected two columns"))?;
        if iter.parse::<usize>().ok() != Some(out.len()) {
            return Err(DcaError::parse(lineno, format!("expected iteration {}", out.len())));
        }
        out.push(loss.parse().map_err(|_| DcaError::parse(lineno, format!("bad loss {loss:?}")))?);
    }
    Ok(out)
}
