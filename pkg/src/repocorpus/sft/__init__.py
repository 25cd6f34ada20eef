"""Supervised fine-tuning data: relations, composition tasks, utilization tasks."""
