"""Check operations"""
