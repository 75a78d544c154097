#!/usr/bin/env python3
"""
HiGRU - Command-Line Entry Point

Run with:
    python run.py train --train data/train.jsonl --scheme data/scheme.json
    python run.py eval --checkpoint instance/runs/best.ckpt --test data/test.jsonl
"""

from higru.commands import create_cli

# Create command group
cli = create_cli()

if __name__ == '__main__':
    cli()
