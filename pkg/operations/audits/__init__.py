"""Audit operations"""
