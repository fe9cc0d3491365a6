//! Numeric schedules: explicit lists (`1e3,1e4,1e5`) or geometric progressions
//! (`geom:START:FACTOR:COUNT`).

pub fn parse_schedule(src: &str) -> Result<Vec<f64>, String> {
    let src = src.trim();
    if let Some(rest) = src.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("{src:?}: expected geom:START:FACTOR:COUNT"));
        }
        let start = parse_num(parts[0])?;
        let factor = parse_num(parts[1])?;
        let count: usize = parts[2].parse().map_err(|e| format!("{src:?}: bad count: {e}"))?;
        if !(start > 0.0) || !(factor > 1.0) || count == 0 {
            return Err(format!("{src:?}: need START > 0, FACTOR > 1 and COUNT ≥ 1"));
        }
        // repeated multiplication keeps integer progressions exact
        let mut out = Vec::with_capacity(count);
        let mut x = start;
        for _ in 0..count {
            out.push(x);
            x *= factor;
        }
        return Ok(out);
    }
    let xs = src.split(',').map(parse_num).collect::<Result<Vec<_>, _>>()?;
    if xs.is_empty() {
        return Err("empty schedule".into());
    }
    Ok(xs)
}

pub fn parse_num(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|e| format!("{s:?} is not a number: {e}"))?;
    if !x.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(x)
}

/// Powers of ten from `lo` to `hi` inclusive.
pub fn decades(lo: f64, hi: f64) -> Result<Vec<f64>, String> {
    if !(lo > 0.0) || !(hi >= lo) {
        return Err(format!("bad index range {lo}..{hi}"));
    }
    let (a, b) = (lo.log10().round() as i32, hi.log10().round() as i32);
    Ok((a..=b).map(|k| 10f64.powi(k)).collect())
}
