//! Parsers for horizon schedules, sites and configuration files.

use erw_core::{Error, Result, Site};

fn bad(msg: String) -> Error {
    Error::InvalidConfig(msg)
}

/// An integer or a power of two written `2^k`.
fn parse_count(tok: &str) -> Result<u64> {
    let tok = tok.trim();
    if let Some(k) = tok.strip_prefix("2^") {
        let k: u32 = k
            .parse()
            .map_err(|_| bad(format!("bad exponent in '{tok}'")))?;
        return 1u64
            .checked_shl(k)
            .filter(|_| k < 64)
            .ok_or_else(|| bad(format!("'{tok}' overflows")));
    }
    tok.replace('_', "")
        .parse()
        .map_err(|_| bad(format!("'{tok}' is not a step count")))
}

/// Horizon schedule: `1024,4096`, `2^10..2^24` (every power of two in
/// between) or `geom:START:END:RATIO`.
pub fn schedule(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    let out = if let Some(spec) = text.strip_prefix("geom:") {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, r] = parts[..] else {
            return Err(bad(format!(
                "geometric schedule '{text}' needs START:END:RATIO"
            )));
        };
        let (a, b, r) = (parse_count(a)?, parse_count(b)?, parse_count(r)?);
        if a == 0 || r < 2 {
            return Err(bad(format!(
                "geometric schedule '{text}' needs START >= 1 and RATIO >= 2"
            )));
        }
        let mut v = Vec::new();
        let mut t = a;
        while t <= b {
            v.push(t);
            match t.checked_mul(r) {
                Some(n) => t = n,
                None => break,
            }
        }
        v
    } else if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (a.trim(), b.trim());
        let exp = |s: &str| -> Result<u32> {
            s.strip_prefix("2^")
                .and_then(|k| k.parse().ok())
                .filter(|&k: &u32| k < 64)
                .ok_or_else(|| bad(format!("range endpoints must be powers 2^k, got '{s}'")))
        };
        (exp(a)?..=exp(b)?).map(|k| 1u64 << k).collect()
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse_count)
            .collect::<Result<_>>()?
    };
    if out.is_empty() {
        return Err(bad(format!("schedule '{text}' is empty")));
    }
    Ok(out)
}

/// `x,y,z`, optionally in parentheses.
pub fn site(text: &str) -> Result<Site> {
    let t = text.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = t
        .split([',', ' ', '\t'])
        .filter(|s| !s.is_empty())
        .collect();
    let [x, y, z] = parts[..] else {
        return Err(bad(format!("'{text}' is not a site x,y,z")));
    };
    let c = |s: &str| {
        s.parse::<i32>()
            .map_err(|_| bad(format!("'{text}' is not a site x,y,z")))
    };
    Ok(Site::new(c(x)?, c(y)?, c(z)?))
}

/// Sites separated by `;`.
pub fn sites(text: &str) -> Result<Vec<Site>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(site)
        .collect()
}

/// A configuration file: one site per line (`x y z` or `x,y,z`), `#`
/// comments, or a JSON array of `{"x":..,"y":..,"z":..}` objects.
pub fn site_file(text: &str) -> Result<Vec<Site>> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).map_err(|e| bad(format!("configuration JSON: {e}")));
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(site(line).map_err(|_| bad(format!("line {}: '{line}' is not a site", i + 1)))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(schedule("1024").unwrap(), vec![1024]);
        assert_eq!(schedule("10, 2^4,1_000").unwrap(), vec![10, 16, 1000]);
        assert_eq!(
            schedule("2^10..2^13").unwrap(),
            vec![1024, 2048, 4096, 8192]
        );
        assert_eq!(
            schedule("geom:1000:100000:10").unwrap(),
            vec![1000, 10_000, 100_000]
        );
        assert_eq!(
            schedule("geom:2^10:2^14:4").unwrap(),
            vec![1024, 4096, 16384]
        );
        assert!(schedule("").is_err());
        assert!(schedule("geom:1:10").is_err());
        assert!(schedule("geom:5:100:1").is_err());
        assert!(schedule("ten").is_err());
        assert!(schedule("2^70").is_err());
    }

    #[test]
    fn site_forms() {
        assert_eq!(site("1,0,0").unwrap(), Site::new(1, 0, 0));
        assert_eq!(site("(5, -5, 2)").unwrap(), Site::new(5, -5, 2));
        assert_eq!(
            sites("1,0,0;5,5,0").unwrap(),
            vec![Site::new(1, 0, 0), Site::new(5, 5, 0)]
        );
        assert!(site("1,2").is_err());
    }

    #[test]
    fn configuration_files() {
        let text = "# column\n0 0 1\n0,0,2  # top\n\n1 0 1\n";
        assert_eq!(
            site_file(text).unwrap(),
            vec![Site::new(0, 0, 1), Site::new(0, 0, 2), Site::new(1, 0, 1)]
        );
        let json = r#"[{"x":0,"y":0,"z":1}]"#;
        assert_eq!(site_file(json).unwrap(), vec![Site::new(0, 0, 1)]);
        assert!(site_file("0 0\n").is_err());
    }
}
