"""Utility operations"""
