"""Run configuration: loader, defaults and schema."""
