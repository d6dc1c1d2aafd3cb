"""Run operations"""
