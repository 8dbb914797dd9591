#!/usr/bin/env python3
"""Regenerates include/damagebench/default_lexicon.hpp from configs/lexicon.json."""
import json
import pathlib

root = pathlib.Path(__file__).resolve().parent.parent
lexicon = json.loads((root / "configs" / "lexicon.json").read_text(encoding="utf-8"))
compact = json.dumps(lexicon, ensure_ascii=False, separators=(",", ":"))
chunks = [compact[i:i + 100] for i in range(0, len(compact), 100)]
body = "\n".join(f'    R"lex({c})lex"' for c in chunks)
header = f"""#pragma once

// Generated by scripts/embed_lexicon.py from configs/lexicon.json. Do not edit.

namespace damagebench::detail {{

inline constexpr const char* default_lexicon_json =
{body};

}} // namespace damagebench::detail
"""
(root / "include" / "damagebench" / "default_lexicon.hpp").write_text(header, encoding="utf-8")
