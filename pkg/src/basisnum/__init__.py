"""Low-congestion cycle bases with certificates."""
