//! Reading the raw record files, applying the spam and channel filters, and
//! building the row-normalized channel x subreddit sharing matrix.

mod channels;
mod matrix;
mod tuples;

pub use channels::{
    filter_channels, majority_category, parse_channels, read_language_overrides, ChannelFilter,
    ChannelRecord, LanguageOverrides, ParsedChannels, VideoRecord, PLATFORM_CATEGORIES,
};
pub use matrix::{
    build_sharing_matrix, build_sharing_matrix_resolved, MatrixReport, SharingMatrix,
};
pub use tuples::{
    filter_spam, parse_tuples, parse_video_map, resolve, write_tuples, Mention, ParsedTuples,
    ResolvedTuple, SharingTuple, Source, VideoChannelMap, COLLECTION_END, COLLECTION_START,
    DEFAULT_MAX_VIDEOS_PER_AUTHOR,
};

/// Fraction of malformed lines above which a file is rejected outright.
pub(crate) const MAX_MALFORMED_FRACTION: f64 = 0.5;

pub(crate) fn check_malformed(
    format: &'static str,
    skipped: usize,
    total: usize,
) -> crate::Result<()> {
    if total > 0 && skipped as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        return Err(crate::Error::MostlyMalformed {
            format,
            skipped,
            total,
        });
    }
    Ok(())
}
