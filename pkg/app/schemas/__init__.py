"""
Pydantic schemas for run configuration and report records.
"""
