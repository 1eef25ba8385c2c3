from __future__ import annotations

from typing import Literal

Verdict = Literal["pass", "fail"]
OutputFormat = Literal["csv", "json"]
Convention = Literal["state", "time"]
FunctionKind = Literal["constant", "sinusoidal-time", "linear-time", "example61", "tanh-spatial"]
SuiteName = Literal["variance", "covariance", "tails", "ldp", "lnd", "rfbm", "attention", "memory", "lamperti"]
