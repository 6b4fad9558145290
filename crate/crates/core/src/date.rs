//! The classic HTTP date formats used by `Expires`.

use chrono::{DateTime, NaiveDateTime};
use thiserror::Error;

/// Seconds since the Unix epoch, UTC.
pub type UnixTime = i64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unrecognized HTTP date {0:?}")]
pub struct DateError(pub String);

// RFC 1123, RFC 850 (also the 4-digit-year Netscape variant), asctime.
const FORMATS: [&str; 4] = [
    "%a, %d %b %Y %H:%M:%S GMT",
    "%A, %d-%b-%y %H:%M:%S GMT",
    "%A, %d-%b-%Y %H:%M:%S GMT",
    "%a %b %e %H:%M:%S %Y",
];

/// Parses an HTTP date into UTC seconds.
///
/// The weekday has to agree with the calendar date, and impossible dates
/// such as the 30th of February are refused.
pub fn parse_http_date(text: &str) -> Result<UnixTime, DateError> {
    let trimmed = text.trim();
    FORMATS
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(trimmed, fmt).ok())
        .map(|dt| dt.and_utc().timestamp())
        .ok_or_else(|| DateError(text.to_string()))
}

/// Formats UTC seconds as an RFC 1123 date, e.g. `Sun, 27 Apr 1997 01:16:23 GMT`.
pub fn format_http_date(ts: UnixTime) -> String {
    match DateTime::from_timestamp(ts, 0) {
        Some(dt) => dt.format("%a, %d %b %Y %H:%M:%S GMT").to_string(),
        // Out of chrono's range; clamp to the far end of the calendar.
        None if ts < 0 => "Thu, 01 Jan 1970 00:00:00 GMT".to_string(),
        None => "Fri, 31 Dec 9999 23:59:59 GMT".to_string(),
    }
}
